#include "wiom/dataset.hpp"

#include "wiom/container.hpp"
#include "wiom/error.hpp"
#include "wiom/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace wiom {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string storage_name(DatasetStorage s) {
    return s == DatasetStorage::CSI ? "csi" : "wiometric";
}

std::size_t Dataset::record_size() const {
    std::size_t n = 1;
    for (std::size_t d : record_dims) n *= d;
    return n;
}

std::size_t Dataset::bs_slot(const std::string& id) const {
    for (std::size_t i = 0; i < bs_ids.size(); ++i)
        if (bs_ids[i] == id) return i;
    throw ConfigError("unknown base station id: " + id);
}

Eigen::MatrixXcd Dataset::csi_record(std::size_t bs, std::size_t rec) const {
    if (storage != DatasetStorage::CSI) throw ConfigError("dataset does not hold raw CSI");
    if (record_dims.size() != 2) throw ShapeError("CSI records must be rank 2");
    const std::size_t rows = record_dims[0], cols = record_dims[1];
    const std::complex<float>* p = csi.at(bs).data() + rec * rows * cols;
    Eigen::MatrixXcd out(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c)
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                std::complex<double>(p[r * cols + c].real(), p[r * cols + c].imag());
    return out;
}

Eigen::MatrixXd Dataset::feature_record(std::size_t bs, std::size_t rec) const {
    if (storage != DatasetStorage::Wiometric) throw ConfigError("dataset holds raw CSI, not features");
    if (record_dims.size() != 2) throw ShapeError("feature records must be rank 2");
    const std::size_t rows = record_dims[0], cols = record_dims[1];
    const float* p = features.at(bs).data() + rec * rows * cols;
    Eigen::MatrixXd out(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c)
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                static_cast<double>(p[r * cols + c]);
    return out;
}

void Dataset::validate() const {
    const std::size_t n = record_count();
    if (lap_index.size() != n || snapshot_index.size() != n)
        throw ShapeError("pose/lap/snapshot arrays disagree in length");
    if (bs_ids.empty()) throw ConfigError("dataset needs at least one base station");
    const std::size_t store = storage == DatasetStorage::CSI ? csi.size() : features.size();
    if (store != bs_ids.size()) throw ShapeError("per-BS tensor count does not match bs_ids");
    const std::size_t expect = n * record_size();
    for (std::size_t b = 0; b < bs_ids.size(); ++b) {
        const std::size_t got =
            storage == DatasetStorage::CSI ? csi[b].size() : features[b].size();
        if (got != expect)
            throw ShapeError("BS " + bs_ids[b] + " tensor has " + std::to_string(got) +
                             " values, expected " + std::to_string(expect));
    }
    for (std::size_t i = 1; i < n; ++i) {
        if (snapshot_index[i] <= snapshot_index[i - 1])
            throw ConfigError("snapshot_index must be strictly increasing");
        if (lap_index[i] < lap_index[i - 1])
            throw ConfigError("lap_index must be non-decreasing");
    }
    if (normalizer) {
        if (normalizer->size() != bs_ids.size())
            throw ShapeError("normalizer stats count does not match bs_ids");
        for (const auto& stats : *normalizer)
            if (stats.mean.size() != record_size() || stats.stdev.size() != record_size())
                throw ShapeError("normalizer stats do not match the record shape");
    }
}

std::string split_kind_name(SplitAssignment::Kind k) {
    return k == SplitAssignment::Kind::LEU ? "leu" : "heu";
}

namespace {

std::vector<std::size_t> sorted_copy(std::vector<std::size_t> v) {
    std::sort(v.begin(), v.end());
    return v;
}

// round-to-nearest with ties up
std::size_t holdout_count(std::size_t n, double fraction) {
    return static_cast<std::size_t>(std::floor(static_cast<double>(n) * fraction + 0.5));
}

std::vector<std::size_t> pick_holdout(const std::vector<std::size_t>& pool, std::size_t k,
                                      Rng& rng) {
    std::vector<std::size_t> shuffled = pool;
    for (std::size_t i = shuffled.size(); i > 1; --i) {
        std::size_t j = rng.uniform_index(i);
        std::swap(shuffled[i - 1], shuffled[j]);
    }
    shuffled.resize(std::min(k, shuffled.size()));
    return shuffled;
}

} // namespace

SplitAssignment split_leu(const Dataset& ds, double test_fraction, std::uint64_t seed,
                          bool stratify_by_lap) {
    if (ds.record_count() == 0) throw ConfigError("cannot split an empty dataset");
    if (!(test_fraction > 0.0) || !(test_fraction < 1.0))
        throw ConfigError("test_fraction must be in (0, 1)");
    const std::size_t n = ds.record_count();
    Rng rng(mix_seed(seed, 0x5e5));

    std::vector<std::size_t> test;
    if (stratify_by_lap) {
        std::map<std::uint32_t, std::vector<std::size_t>> by_lap;
        for (std::size_t i = 0; i < n; ++i) by_lap[ds.lap_index[i]].push_back(i);
        for (auto& [lap, pool] : by_lap) {
            auto picked = pick_holdout(pool, holdout_count(pool.size(), test_fraction), rng);
            test.insert(test.end(), picked.begin(), picked.end());
        }
    } else {
        std::vector<std::size_t> pool(n);
        std::iota(pool.begin(), pool.end(), std::size_t{0});
        test = pick_holdout(pool, holdout_count(n, test_fraction), rng);
    }
    std::sort(test.begin(), test.end());

    SplitAssignment split;
    split.kind = SplitAssignment::Kind::LEU;
    split.test_fraction = test_fraction;
    split.seed = seed;
    split.test_indices = test;
    split.train_indices.reserve(n - test.size());
    std::size_t t = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (t < test.size() && test[t] == i) {
            ++t;
        } else {
            split.train_indices.push_back(i);
        }
    }
    return split;
}

SplitAssignment split_heu(const Dataset& ds, std::uint32_t held_out_lap) {
    if (ds.record_count() == 0) throw ConfigError("cannot split an empty dataset");
    SplitAssignment split;
    split.kind = SplitAssignment::Kind::HEU;
    split.held_out_lap = static_cast<int>(held_out_lap);
    for (std::size_t i = 0; i < ds.record_count(); ++i) {
        if (ds.lap_index[i] == held_out_lap)
            split.test_indices.push_back(i);
        else
            split.train_indices.push_back(i);
    }
    if (split.test_indices.empty())
        throw ConfigError("no records with lap_index " + std::to_string(held_out_lap));
    return split;
}

NormStats fit_normalizer(const Dataset& ds, const std::vector<std::size_t>& train_indices,
                         std::size_t bs) {
    if (ds.storage != DatasetStorage::Wiometric)
        throw ConfigError("normalizer requires a wiometric dataset");
    if (train_indices.empty()) throw ConfigError("normalizer needs a non-empty training set");
    const std::size_t sz = ds.record_size();
    std::vector<double> sum(sz, 0.0), sumsq(sz, 0.0);
    const auto& store = ds.features.at(bs);
    for (std::size_t idx : train_indices) {
        const float* p = store.data() + idx * sz;
        for (std::size_t e = 0; e < sz; ++e) {
            const double v = p[e];
            sum[e] += v;
            sumsq[e] += v * v;
        }
    }
    const double inv_n = 1.0 / static_cast<double>(train_indices.size());
    NormStats stats;
    stats.mean.resize(sz);
    stats.stdev.resize(sz);
    for (std::size_t e = 0; e < sz; ++e) {
        const double mean = sum[e] * inv_n;
        const double var = std::max(0.0, sumsq[e] * inv_n - mean * mean);
        stats.mean[e] = static_cast<float>(mean);
        stats.stdev[e] = static_cast<float>(std::max(std::sqrt(var), 1e-8));
    }
    return stats;
}

NormStats fit_normalizer(const Dataset& ds, const SplitAssignment& split, std::size_t bs) {
    return fit_normalizer(ds, split.train_indices, bs);
}

std::vector<double> normalized_record(const Dataset& ds, const NormStats& stats, std::size_t bs,
                                      std::size_t rec) {
    const std::size_t sz = ds.record_size();
    if (stats.mean.size() != sz || stats.stdev.size() != sz)
        throw ShapeError("normalizer stats do not match the record shape");
    const float* p = ds.features.at(bs).data() + rec * sz;
    std::vector<double> out(sz);
    for (std::size_t e = 0; e < sz; ++e)
        out[e] = (static_cast<double>(p[e]) - static_cast<double>(stats.mean[e])) /
                 static_cast<double>(stats.stdev[e]);
    return out;
}

namespace {

std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

json geometry_to_json(const ArrayGeometry& g) {
    return json{{"rings", g.rings},
                {"elements_per_ring", g.elements_per_ring},
                {"polarizations", g.polarizations},
                {"ring_radius", g.ring_radius},
                {"ring_spacing", g.ring_spacing},
                {"carrier_frequency", g.carrier_frequency},
                {"directivity_exponent", g.directivity_exponent}};
}

ArrayGeometry geometry_from_json(const json& j) {
    ArrayGeometry g;
    g.rings = j.at("rings").get<int>();
    g.elements_per_ring = j.at("elements_per_ring").get<int>();
    g.polarizations = j.at("polarizations").get<int>();
    g.ring_radius = j.at("ring_radius").get<double>();
    g.ring_spacing = j.at("ring_spacing").get<double>();
    g.carrier_frequency = j.at("carrier_frequency").get<double>();
    g.directivity_exponent = j.at("directivity_exponent").get<double>();
    return g;
}

struct BlobEntry {
    std::string file;
    std::uint64_t checksum;
};

BlobEntry write_and_sum(const fs::path& dir, const std::string& name, const TensorF& t) {
    write_blob(dir / name, t);
    return {name, file_checksum(dir / name)};
}

BlobEntry write_and_sum(const fs::path& dir, const std::string& name, const TensorC& t) {
    write_blob(dir / name, t);
    return {name, file_checksum(dir / name)};
}

BlobEntry write_and_sum(const fs::path& dir, const std::string& name, const TensorU& t) {
    write_blob(dir / name, t);
    return {name, file_checksum(dir / name)};
}

void verify_checksum(const fs::path& dir, const json& blobs, const std::string& key) {
    const std::string file = blobs.at(key).at("file").get<std::string>();
    const std::string want = blobs.at(key).at("fnv1a64").get<std::string>();
    const std::uint64_t got = file_checksum(dir / file);
    if (hex64(got) != want)
        throw IoError("checksum mismatch for " + (dir / file).string());
}

} // namespace

void save_dataset(const Dataset& ds, const fs::path& dir) {
    ds.validate();
    fs::create_directories(dir);

    json meta;
    meta["format"] = "wiom-dataset";
    meta["version"] = 1;
    meta["storage"] = storage_name(ds.storage);
    if (ds.storage == DatasetStorage::Wiometric) meta["kind"] = kind_name(ds.kind);
    meta["subcarriers"] = ds.grid.subcarriers;
    meta["subcarrier_spacing"] = ds.grid.subcarrier_spacing;
    meta["geometry"] = geometry_to_json(ds.geometry);
    meta["record_dims"] = ds.record_dims;
    meta["record_count"] = ds.record_count();
    meta["bs_ids"] = ds.bs_ids;

    json blobs = json::object();
    const std::size_t n = ds.record_count();
    std::vector<std::size_t> rec_dims = ds.record_dims;
    rec_dims.insert(rec_dims.begin(), n);

    for (std::size_t b = 0; b < ds.bs_ids.size(); ++b) {
        const std::string name = "records_" + ds.bs_ids[b] + ".wiom";
        BlobEntry e;
        if (ds.storage == DatasetStorage::CSI) {
            TensorC t{rec_dims, ds.csi[b]};
            e = write_and_sum(dir, name, t);
        } else {
            TensorF t{rec_dims, ds.features[b]};
            e = write_and_sum(dir, name, t);
        }
        blobs["records_" + ds.bs_ids[b]] = {{"file", e.file}, {"fnv1a64", hex64(e.checksum)}};
    }

    TensorF pose_t{{n, 3}, {}};
    pose_t.data.reserve(n * 3);
    for (const Pose& p : ds.poses) {
        pose_t.data.push_back(static_cast<float>(p.x_e));
        pose_t.data.push_back(static_cast<float>(p.x_n));
        pose_t.data.push_back(static_cast<float>(p.gamma));
    }
    BlobEntry pe = write_and_sum(dir, "poses.wiom", pose_t);
    blobs["poses"] = {{"file", pe.file}, {"fnv1a64", hex64(pe.checksum)}};

    TensorU lap_t{{n}, ds.lap_index};
    BlobEntry le = write_and_sum(dir, "lap_index.wiom", lap_t);
    blobs["lap_index"] = {{"file", le.file}, {"fnv1a64", hex64(le.checksum)}};

    TensorU snap_t{{n}, ds.snapshot_index};
    BlobEntry se = write_and_sum(dir, "snapshot_index.wiom", snap_t);
    blobs["snapshot_index"] = {{"file", se.file}, {"fnv1a64", hex64(se.checksum)}};

    if (ds.normalizer) {
        for (std::size_t b = 0; b < ds.bs_ids.size(); ++b) {
            const auto& stats = (*ds.normalizer)[b];
            TensorF t{{2, ds.record_size()}, {}};
            t.data = stats.mean;
            t.data.insert(t.data.end(), stats.stdev.begin(), stats.stdev.end());
            const std::string name = "norm_" + ds.bs_ids[b] + ".wiom";
            BlobEntry e = write_and_sum(dir, name, t);
            blobs["norm_" + ds.bs_ids[b]] = {{"file", e.file}, {"fnv1a64", hex64(e.checksum)}};
        }
        meta["normalizer"] = true;
    } else {
        meta["normalizer"] = false;
    }

    meta["blobs"] = blobs;
    meta["provenance"] = ds.provenance.is_null() ? json::object() : ds.provenance;

    std::ofstream os(dir / "metadata.json", std::ios::trunc);
    if (!os) throw IoError("cannot write " + (dir / "metadata.json").string());
    os << meta.dump(2) << "\n";
}

Dataset load_dataset(const fs::path& dir) {
    const fs::path meta_path = dir / "metadata.json";
    std::ifstream is(meta_path);
    if (!is) throw IoError("missing dataset metadata: " + meta_path.string());
    json meta;
    try {
        is >> meta;
    } catch (const json::exception& e) {
        throw IoError("corrupt dataset metadata: " + meta_path.string() + ": " + e.what());
    }
    try {
        if (meta.at("format").get<std::string>() != "wiom-dataset")
            throw IoError("not a wiom dataset: " + meta_path.string());
        if (meta.at("version").get<int>() != 1)
            throw IoError("unsupported dataset version in " + meta_path.string());

        Dataset ds;
        const std::string storage = meta.at("storage").get<std::string>();
        if (storage == "csi") {
            ds.storage = DatasetStorage::CSI;
        } else if (storage == "wiometric") {
            ds.storage = DatasetStorage::Wiometric;
            ds.kind = kind_from_name(meta.at("kind").get<std::string>());
        } else {
            throw IoError("unknown dataset storage: " + storage);
        }
        ds.grid.subcarriers = meta.at("subcarriers").get<int>();
        ds.grid.subcarrier_spacing = meta.at("subcarrier_spacing").get<double>();
        ds.geometry = geometry_from_json(meta.at("geometry"));
        ds.record_dims = meta.at("record_dims").get<std::vector<std::size_t>>();
        ds.bs_ids = meta.at("bs_ids").get<std::vector<std::string>>();
        const std::size_t n = meta.at("record_count").get<std::size_t>();

        const json& blobs = meta.at("blobs");
        for (const std::string& id : ds.bs_ids) {
            const std::string key = "records_" + id;
            verify_checksum(dir, blobs, key);
            const fs::path file = dir / blobs.at(key).at("file").get<std::string>();
            if (ds.storage == DatasetStorage::CSI) {
                TensorC t = read_blob_c64(file);
                if (t.dims.empty() || t.dims[0] != n)
                    throw IoError("record blob count mismatch: " + file.string());
                ds.csi.push_back(std::move(t.data));
            } else {
                TensorF t = read_blob_f32(file);
                if (t.dims.empty() || t.dims[0] != n)
                    throw IoError("record blob count mismatch: " + file.string());
                ds.features.push_back(std::move(t.data));
            }
        }

        verify_checksum(dir, blobs, "poses");
        TensorF pose_t = read_blob_f32(dir / blobs.at("poses").at("file").get<std::string>());
        if (pose_t.dims != std::vector<std::size_t>{n, 3})
            throw IoError("pose blob has wrong shape");
        ds.poses.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            // Poses were normalized before saving; reconstruct without touching values.
            Pose p;
            p.x_e = pose_t.data[3 * i];
            p.x_n = pose_t.data[3 * i + 1];
            p.gamma = pose_t.data[3 * i + 2];
            ds.poses.push_back(p);
        }

        verify_checksum(dir, blobs, "lap_index");
        TensorU lap_t = read_blob_u32(dir / blobs.at("lap_index").at("file").get<std::string>());
        if (lap_t.dims != std::vector<std::size_t>{n}) throw IoError("lap blob has wrong shape");
        ds.lap_index = std::move(lap_t.data);

        verify_checksum(dir, blobs, "snapshot_index");
        TensorU snap_t =
            read_blob_u32(dir / blobs.at("snapshot_index").at("file").get<std::string>());
        if (snap_t.dims != std::vector<std::size_t>{n})
            throw IoError("snapshot blob has wrong shape");
        ds.snapshot_index = std::move(snap_t.data);

        if (meta.at("normalizer").get<bool>()) {
            std::vector<NormStats> all;
            for (const std::string& id : ds.bs_ids) {
                const std::string key = "norm_" + id;
                verify_checksum(dir, blobs, key);
                TensorF t = read_blob_f32(dir / blobs.at(key).at("file").get<std::string>());
                if (t.dims != std::vector<std::size_t>{2, ds.record_size()})
                    throw IoError("normalizer blob has wrong shape");
                NormStats stats;
                stats.mean.assign(t.data.begin(),
                                  t.data.begin() + static_cast<std::ptrdiff_t>(ds.record_size()));
                stats.stdev.assign(t.data.begin() + static_cast<std::ptrdiff_t>(ds.record_size()),
                                   t.data.end());
                all.push_back(std::move(stats));
            }
            ds.normalizer = std::move(all);
        }

        ds.provenance = meta.value("provenance", json::object());
        ds.validate();
        return ds;
    } catch (const json::exception& e) {
        throw IoError("corrupt dataset metadata: " + meta_path.string() + ": " + e.what());
    }
}

std::string describe_dataset(const fs::path& dir) {
    const fs::path meta_path = dir / "metadata.json";
    std::ifstream is(meta_path);
    if (!is) throw IoError("missing dataset metadata: " + meta_path.string());
    json meta;
    try {
        is >> meta;
    } catch (const json::exception& e) {
        throw IoError("corrupt dataset metadata: " + meta_path.string() + ": " + e.what());
    }
    std::ostringstream out;
    out << "dataset: " << dir.string() << "\n";
    out << "  storage: " << meta.value("storage", std::string("?"));
    if (meta.contains("kind")) out << " (" << meta["kind"].get<std::string>() << ")";
    out << "\n";
    out << "  records: " << meta.value("record_count", std::size_t{0});
    out << "  dims: [";
    bool first = true;
    for (const auto& d : meta.value("record_dims", std::vector<std::size_t>{})) {
        if (!first) out << ", ";
        out << d;
        first = false;
    }
    out << "]\n";
    out << "  base stations:";
    for (const auto& id : meta.value("bs_ids", std::vector<std::string>{})) out << " " << id;
    out << "\n";
    if (meta.contains("blobs")) {
        out << "  blobs:\n";
        for (const auto& [key, entry] : meta["blobs"].items()) {
            const std::string file = entry.value("file", std::string("?"));
            BlobInfo info = blob_info(dir / file);
            const std::string want = entry.value("fnv1a64", std::string(""));
            const bool ok = hex64(info.checksum) == want;
            out << "    " << file << ": " << dtype_name(info.dtype) << " [";
            for (std::size_t i = 0; i < info.dims.size(); ++i) {
                if (i) out << ", ";
                out << info.dims[i];
            }
            out << "] fnv1a64=" << hex64(info.checksum) << (ok ? " (ok)" : " (MISMATCH)") << "\n";
        }
    }
    return out.str();
}

} // namespace wiom
