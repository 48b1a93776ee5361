#pragma once

#include "wiom/array.hpp"
#include "wiom/ofdm.hpp"
#include "wiom/pose.hpp"
#include "wiom/wiometrics.hpp"

#include <nlohmann/json.hpp>

#include <complex>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace wiom {

// A dataset holds either raw CSI snapshots or one derived wiometric, for every
// pose and base station. Records are stored per BS as contiguous row-major
// tensors aligned with the pose list; float32/complex64 precision matches the
// on-disk container exactly so save/load round-trips are bitwise.
enum class DatasetStorage { CSI, Wiometric };

std::string storage_name(DatasetStorage s);

struct NormStats {
    std::vector<float> mean;  // per tensor element
    std::vector<float> stdev; // per tensor element, floored at 1e-8
};

struct Dataset {
    DatasetStorage storage = DatasetStorage::CSI;
    WiometricKind kind = WiometricKind::ACSI; // meaningful when storage == Wiometric
    OfdmGrid grid;
    ArrayGeometry geometry;
    std::vector<std::size_t> record_dims; // per-record tensor dims, e.g. {S, M}

    std::vector<std::string> bs_ids;
    // csi[b] (storage CSI) or features[b] (storage Wiometric): record_count() *
    // prod(record_dims) values, record-major.
    std::vector<std::vector<std::complex<float>>> csi;
    std::vector<std::vector<float>> features;

    std::vector<Pose> poses;
    std::vector<std::uint32_t> lap_index;
    std::vector<std::uint32_t> snapshot_index;

    // Per-BS z-score statistics, present once a normalizer has been fitted.
    std::optional<std::vector<NormStats>> normalizer;

    nlohmann::ordered_json provenance; // configs this dataset was produced from

    std::size_t record_count() const { return poses.size(); }
    std::size_t record_size() const;
    std::size_t bs_count() const { return bs_ids.size(); }
    std::size_t bs_slot(const std::string& id) const; // throws ConfigError if unknown

    // Record views (cast up to double for all in-memory math).
    Eigen::MatrixXcd csi_record(std::size_t bs, std::size_t rec) const;
    Eigen::MatrixXd feature_record(std::size_t bs, std::size_t rec) const;

    void validate() const; // throws ShapeError / ConfigError on inconsistency
};

// Split protocols. LEU holds out a random fraction of snapshots; HEU holds out
// every snapshot of one lap.
struct SplitAssignment {
    enum class Kind { LEU, HEU };
    Kind kind = Kind::LEU;
    std::vector<std::size_t> train_indices; // ascending
    std::vector<std::size_t> test_indices;  // ascending
    double test_fraction = 0.0;             // LEU only
    std::uint64_t seed = 0;                 // LEU only
    int held_out_lap = -1;                  // HEU only
};

std::string split_kind_name(SplitAssignment::Kind k);

// Seeded uniform holdout; test set size = round(test_fraction * n), ties up.
// stratify_by_lap draws the same fraction from each lap instead of globally.
SplitAssignment split_leu(const Dataset& ds, double test_fraction, std::uint64_t seed,
                          bool stratify_by_lap = false);
// Whole-lap holdout. Throws ConfigError if the lap does not occur.
SplitAssignment split_heu(const Dataset& ds, std::uint32_t held_out_lap);

// Per-element mean/std fitted on the given (training) records of one BS slot.
// Requires a wiometric dataset and a non-empty index list.
NormStats fit_normalizer(const Dataset& ds, const std::vector<std::size_t>& train_indices,
                         std::size_t bs);
NormStats fit_normalizer(const Dataset& ds, const SplitAssignment& split, std::size_t bs);

// (x - mean) / stdev for one record, as doubles.
std::vector<double> normalized_record(const Dataset& ds, const NormStats& stats, std::size_t bs,
                                      std::size_t rec);

// Directory layout: metadata.json plus one blob per BS tensor and the pose /
// lap / snapshot-index arrays. metadata.json records dtypes, shapes, FNV-1a 64
// checksums, and the provenance configs. load verifies checksums and shape
// consistency and throws IoError on any mismatch.
void save_dataset(const Dataset& ds, const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir);

// Human-readable summary used by the CLI inspect subcommand.
std::string describe_dataset(const std::filesystem::path& dir);

} // namespace wiom
