// cache.hpp — binary persistence for propagators and eigendecompositions
//
// Propagator file: header (format version, map label and entries, kind, k,
// k0, window, N) followed by the matrix as row-major (re, im) pairs of
// 8-byte little-endian floats, then a payload checksum. Eigensystem files
// carry the same header plus N phases and the row-major state matrix.
// Cache files are keyed by the header tuple and written atomically
// (temp file + rename). A version or checksum mismatch reads as a miss.
#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "qcat/errors.hpp"
#include "qcat/quantize.hpp"
#include "qcat/spectral.hpp"

namespace qcat {

inline constexpr std::uint32_t kCacheFormatVersion = 1;

inline std::uint64_t fnv1a64(const void* data, std::size_t len, std::uint64_t h = 0xcbf29ce484222325ULL) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace detail {

struct BinWriter {
    std::ofstream out;
    std::uint64_t checksum{0xcbf29ce484222325ULL};

    explicit BinWriter(const std::filesystem::path& p)
        : out(p, std::ios::binary | std::ios::trunc) {
        if (!out) throw CacheError("cannot open for write: " + p.string());
    }
    void raw(const void* data, std::size_t len) {
        out.write(static_cast<const char*>(data), std::streamsize(len));
        checksum = fnv1a64(data, len, checksum);
    }
    template <class T> void put(const T& v) { raw(&v, sizeof(T)); }
    void put_string(const std::string& s) {
        std::uint32_t len = std::uint32_t(s.size());
        put(len);
        raw(s.data(), s.size());
    }
};

struct BinReader {
    std::ifstream in;
    std::uint64_t checksum{0xcbf29ce484222325ULL};

    explicit BinReader(const std::filesystem::path& p) : in(p, std::ios::binary) {
        if (!in) throw CacheError("cannot open for read: " + p.string());
    }
    void raw(void* data, std::size_t len) {
        in.read(static_cast<char*>(data), std::streamsize(len));
        if (std::size_t(in.gcount()) != len) throw CacheError("truncated cache file");
        checksum = fnv1a64(data, len, checksum);
    }
    template <class T> T get() {
        T v;
        raw(&v, sizeof(T));
        return v;
    }
    std::string get_string() {
        std::uint32_t len = get<std::uint32_t>();
        if (len > 4096) throw CacheError("implausible string length in cache file");
        std::string s(len, '\0');
        raw(s.data(), len);
        return s;
    }
};

inline void write_header(BinWriter& w, const char magic[8], const PropagatorMeta& meta) {
    w.raw(magic, 8);
    w.put(kCacheFormatVersion);
    w.put_string(meta.map_label);
    w.put(meta.g11);
    w.put(meta.g12);
    w.put(meta.g21);
    w.put(meta.g22);
    w.put(std::uint32_t(meta.kind));
    w.put(meta.k);
    w.put(meta.k0);
    w.put(meta.window.q0);
    w.put(meta.window.w);
    w.put(std::uint64_t(meta.n));
}

// nullopt on any mismatch (stale version is a miss, not an error)
inline std::optional<PropagatorMeta> read_header(BinReader& r, const char magic[8]) {
    char m[8];
    r.raw(m, 8);
    if (std::memcmp(m, magic, 8) != 0) return std::nullopt;
    if (r.get<std::uint32_t>() != kCacheFormatVersion) return std::nullopt;
    PropagatorMeta meta;
    meta.map_label = r.get_string();
    meta.g11 = r.get<std::int64_t>();
    meta.g12 = r.get<std::int64_t>();
    meta.g21 = r.get<std::int64_t>();
    meta.g22 = r.get<std::int64_t>();
    meta.kind = PerturbationKind(r.get<std::uint32_t>());
    meta.k = r.get<double>();
    meta.k0 = r.get<double>();
    double q0 = r.get<double>();
    double w = r.get<double>();
    meta.window = ShearWindow(q0, w);
    meta.n = int(r.get<std::uint64_t>());
    return meta;
}

inline void write_matrix_rowmajor(BinWriter& w, const Matrix& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            double re = m(i, j).real(), im = m(i, j).imag();
            w.put(re);
            w.put(im);
        }
}

inline Matrix read_matrix_rowmajor(BinReader& r, int rows, int cols) {
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) {
            double re = r.get<double>();
            double im = r.get<double>();
            m(i, j) = Complex(re, im);
        }
    return m;
}

inline void atomic_rename(const std::filesystem::path& tmp, const std::filesystem::path& final_path) {
    std::error_code ec;
    std::filesystem::rename(tmp, final_path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw CacheError("rename failed: " + ec.message());
    }
}

} // namespace detail

inline constexpr char kPropMagic[8] = {'Q', 'C', 'A', 'T', 'P', 'R', 'P', '1'};
inline constexpr char kEigMagic[8] = {'Q', 'C', 'A', 'T', 'E', 'I', 'G', '1'};

inline void save_propagator(const std::filesystem::path& path, const Propagator& prop) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        detail::BinWriter w(tmp);
        detail::write_header(w, kPropMagic, prop.meta);
        detail::write_matrix_rowmajor(w, prop.matrix);
        w.put(w.checksum);
        if (!w.out) throw CacheError("write failed: " + tmp.string());
    }
    detail::atomic_rename(tmp, path);
}

inline std::optional<Propagator> load_propagator(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) return std::nullopt;
    detail::BinReader r(path);
    auto meta = detail::read_header(r, kPropMagic);
    if (!meta) return std::nullopt;
    Matrix m = detail::read_matrix_rowmajor(r, meta->n, meta->n);
    std::uint64_t expect = r.checksum;
    if (r.get<std::uint64_t>() != expect) return std::nullopt;
    require_unitary(m, "load_propagator(" + path.string() + ")");
    return Propagator{std::move(m), *meta};
}

inline void save_eigensystem(const std::filesystem::path& path, const PropagatorMeta& meta,
                             const EigenSystem& es) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        detail::BinWriter w(tmp);
        detail::write_header(w, kEigMagic, meta);
        for (int j = 0; j < es.dim(); ++j) w.put(es.phases[j]);
        detail::write_matrix_rowmajor(w, es.states);
        w.put(w.checksum);
        if (!w.out) throw CacheError("write failed: " + tmp.string());
    }
    detail::atomic_rename(tmp, path);
}

inline std::optional<EigenSystem> load_eigensystem(const std::filesystem::path& path,
                                                   const PropagatorMeta& want) {
    if (!std::filesystem::exists(path)) return std::nullopt;
    detail::BinReader r(path);
    auto meta = detail::read_header(r, kEigMagic);
    if (!meta || !(*meta == want)) return std::nullopt;
    EigenSystem es;
    es.phases.resize(meta->n);
    for (int j = 0; j < meta->n; ++j) es.phases[j] = r.get<double>();
    es.states = detail::read_matrix_rowmajor(r, meta->n, meta->n);
    std::uint64_t expect = r.checksum;
    if (r.get<std::uint64_t>() != expect) return std::nullopt;
    return es;
}

// Directory of eigendecompositions keyed by the propagator header tuple.
class EigenCache {
public:
    EigenCache() = default;
    explicit EigenCache(std::filesystem::path dir) : dir_(std::move(dir)) {
        if (!dir_.empty()) std::filesystem::create_directories(dir_);
    }

    bool enabled() const { return !dir_.empty(); }

    std::filesystem::path path_for(const PropagatorMeta& meta) const {
        return dir_ / (key_hex(meta) + ".eig");
    }

    std::optional<EigenSystem> load(const PropagatorMeta& meta) const {
        if (!enabled()) return std::nullopt;
        return load_eigensystem(path_for(meta), meta);
    }

    void store(const PropagatorMeta& meta, const EigenSystem& es) const {
        if (!enabled()) return;
        save_eigensystem(path_for(meta), meta, es);
    }

    static std::string key_hex(const PropagatorMeta& meta) {
        std::string blob = meta.map_label + "|" + std::to_string(meta.g11) + "," +
                           std::to_string(meta.g12) + "," + std::to_string(meta.g21) + "," +
                           std::to_string(meta.g22) + "|" + kind_label(meta.kind);
        std::uint64_t h = fnv1a64(blob.data(), blob.size());
        double fields[5] = {meta.k, meta.k0, meta.window.q0, meta.window.w, double(meta.n)};
        h = fnv1a64(fields, sizeof(fields), h);
        char buf[17];
        std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
        return std::string(buf);
    }

private:
    std::filesystem::path dir_;
};

// Eigendecompose through the cache; falls back to a fresh decomposition.
inline EigenSystem cached_eigendecompose(const Propagator& prop, const EigenCache& cache) {
    if (auto hit = cache.load(prop.meta)) return std::move(*hit);
    EigenSystem es = eigendecompose(prop);
    cache.store(prop.meta, es);
    return es;
}

} // namespace qcat
