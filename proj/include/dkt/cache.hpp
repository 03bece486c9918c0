#pragma once

// Disk persistence for the two expensive immutable tables: canonical tower
// moduli and subgroup lattices of GL_r(A/(a)). Each entry is one JSON file
// in a single directory, named by its parameter key, with the key repeated
// inside the file so a renamed entry cannot masquerade as another. Entries
// only memoize deterministic computations, so a cold and a warm run produce
// the same results. Corrupt entries are deleted with a warning and rebuilt.
//
// Directory resolution: DKT_CACHE_DIR, else XDG_CACHE_HOME/dkt, else
// HOME/.cache/dkt, else ./.dkt-cache.

#include "galois.hpp"

#include <json.hpp>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <unistd.h>

namespace dkt {

struct CacheEntry {
    std::string file;
    std::string kind; // "modulus" or "lattice"
    u64 bytes = 0;
};

inline std::filesystem::path cache_directory() {
    if (const char* dir = std::getenv("DKT_CACHE_DIR")) return std::filesystem::path(dir);
    if (const char* xdg = std::getenv("XDG_CACHE_HOME"))
        return std::filesystem::path(xdg) / "dkt";
    if (const char* home = std::getenv("HOME"))
        return std::filesystem::path(home) / ".cache" / "dkt";
    return std::filesystem::path(".dkt-cache");
}

namespace detail {

inline std::atomic<u64>& cache_warning_count() {
    static std::atomic<u64> n{0};
    return n;
}

inline void drop_cache_entry(const std::filesystem::path& p, const char* why) {
    ++cache_warning_count();
    std::cerr << "warning: " << why << " cache entry " << p.string() << "; rebuilding\n";
    std::error_code ec;
    std::filesystem::remove(p, ec);
}

// Absent file: silent miss. Unparseable file: corrupt.
inline bool read_cache_json(const std::filesystem::path& p, nlohmann::json& out) {
    std::ifstream in(p);
    if (!in) return false;
    try {
        in >> out;
        if (!out.is_object()) throw std::runtime_error("not an object");
        return true;
    } catch (const std::exception&) {
        drop_cache_entry(p, "corrupt");
        return false;
    }
}

// Atomic publish: write a private temp file, then rename into place. The
// store is best effort; a failed write only costs a rebuild later.
inline void write_cache_json(const std::filesystem::path& p, const nlohmann::json& j) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
    std::filesystem::path tmp = p;
    tmp += "." + std::to_string(::getpid()) + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) return;
        out << j.dump(2) << "\n";
        if (!out) {
            out.close();
            std::filesystem::remove(tmp, ec);
            return;
        }
    }
    std::filesystem::rename(tmp, p, ec);
    if (ec) std::filesystem::remove(tmp, ec);
}

// The polynomial strings used in keys contain '^', '*', and '+'; keep file
// names plain and rely on the embedded key for disambiguation.
inline std::string sanitize_cache_key(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (std::isalnum(static_cast<unsigned char>(c))) out.push_back(c);
        else out.push_back('_');
    }
    return out;
}

inline std::filesystem::path modulus_cache_path(u64 p, unsigned e, unsigned degree) {
    return cache_directory() / ("modulus-p" + std::to_string(p) + "-e" + std::to_string(e) +
                                "-d" + std::to_string(degree) + ".json");
}

inline std::filesystem::path lattice_cache_path(u64 q, unsigned r, const std::string& a) {
    return cache_directory() / ("lattice-q" + std::to_string(q) + "-r" + std::to_string(r) +
                                "-" + sanitize_cache_key(a) + ".json");
}

inline bool load_modulus_entry(u64 p, unsigned e, unsigned degree, std::vector<u64>& coeffs) {
    auto path = modulus_cache_path(p, e, degree);
    nlohmann::json j;
    if (!read_cache_json(path, j)) return false;
    try {
        if (j.at("p").get<u64>() != p || j.at("e").get<u64>() != e ||
            j.at("degree").get<u64>() != degree)
            throw std::runtime_error("key mismatch");
        std::vector<u64> c = j.at("coeffs").get<std::vector<u64>>();
        if (c.size() != size_t(degree) + 1 || c.back() == 0)
            throw std::runtime_error("bad coefficient vector");
        coeffs = std::move(c);
        return true;
    } catch (const std::exception&) {
        drop_cache_entry(path, "corrupt");
        return false;
    }
}

inline void store_modulus_entry(u64 p, unsigned e, unsigned degree,
                                const std::vector<u64>& coeffs) {
    nlohmann::json j{{"coeffs", coeffs}, {"degree", degree}, {"e", e}, {"p", p}};
    write_cache_json(modulus_cache_path(p, e, degree), j);
}

inline bool load_lattice_entry(u64 q, unsigned r, const std::string& a, GlLattice& lat) {
    auto path = lattice_cache_path(q, r, a);
    nlohmann::json j;
    if (!read_cache_json(path, j)) return false;
    try {
        if (j.at("q").get<u64>() != q || j.at("r").get<u64>() != r ||
            j.at("level").get<std::string>() != a)
            throw std::runtime_error("key mismatch");
        GlLattice out;
        out.order = j.at("order").get<u64>();
        out.sl_order = j.at("sl_order").get<u64>();
        out.pair_keys = j.at("pair_keys").get<std::vector<std::vector<u64>>>();
        out.elem_pair = j.at("elem_pair").get<std::vector<u64>>();
        for (u64 b : j.at("elem_in_sl").get<std::vector<u64>>())
            out.elem_in_sl.push_back(b ? 1 : 0);
        out.subgroups = j.at("subgroups").get<std::vector<std::vector<u64>>>();
        out.subgroup_pairs = j.at("subgroup_pairs").get<std::vector<std::vector<u64>>>();
        out.full_subgroup = j.at("full_subgroup").get<u64>();
        if (out.order == 0 || out.elem_pair.size() != out.order ||
            out.elem_in_sl.size() != out.order || out.sl_order == 0 ||
            out.order % out.sl_order != 0 || out.subgroups.empty() ||
            out.subgroup_pairs.size() != out.subgroups.size() ||
            out.full_subgroup >= out.subgroups.size() ||
            out.subgroups[out.full_subgroup].size() != out.order)
            throw std::runtime_error("inconsistent lattice");
        for (const auto& sub : out.subgroups)
            if (sub.empty() || out.order % sub.size() != 0)
                throw std::runtime_error("inconsistent lattice");
        lat = std::move(out);
        return true;
    } catch (const std::exception&) {
        drop_cache_entry(path, "corrupt");
        return false;
    }
}

inline void store_lattice_entry(u64 q, unsigned r, const std::string& a, const GlLattice& lat) {
    std::vector<u64> in_sl(lat.elem_in_sl.begin(), lat.elem_in_sl.end());
    nlohmann::json j{{"elem_in_sl", in_sl},
                     {"elem_pair", lat.elem_pair},
                     {"full_subgroup", lat.full_subgroup},
                     {"level", a},
                     {"order", lat.order},
                     {"pair_keys", lat.pair_keys},
                     {"q", q},
                     {"r", r},
                     {"sl_order", lat.sl_order},
                     {"subgroup_pairs", lat.subgroup_pairs},
                     {"subgroups", lat.subgroups}};
    write_cache_json(lattice_cache_path(q, r, a), j);
}

} // namespace detail

// Idempotent; safe to call from every entry point that wants persistence.
inline void install_disk_cache() {
    static std::once_flag flag;
    std::call_once(flag, [] {
        detail::tower_modulus_hooks().load = detail::load_modulus_entry;
        detail::tower_modulus_hooks().store = detail::store_modulus_entry;
        detail::gl_lattice_hooks().load = detail::load_lattice_entry;
        detail::gl_lattice_hooks().store = detail::store_lattice_entry;
    });
}

inline std::vector<CacheEntry> cache_inspect() {
    std::vector<CacheEntry> out;
    std::error_code ec;
    auto dir = cache_directory();
    if (!std::filesystem::is_directory(dir, ec)) return out;
    for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
        if (!entry.is_regular_file()) continue;
        std::string name = entry.path().filename().string();
        if (name.size() < 6 || name.substr(name.size() - 5) != ".json") continue;
        std::string kind = name.substr(0, name.find('-'));
        if (kind != "modulus" && kind != "lattice") continue;
        out.push_back({name, kind, (u64)entry.file_size(ec)});
    }
    std::sort(out.begin(), out.end(),
              [](const CacheEntry& x, const CacheEntry& y) { return x.file < y.file; });
    return out;
}

inline u64 cache_clear() {
    u64 removed = 0;
    std::error_code ec;
    auto dir = cache_directory();
    if (!std::filesystem::is_directory(dir, ec)) return 0;
    for (const auto& entry : cache_inspect()) {
        if (std::filesystem::remove(dir / entry.file, ec)) ++removed;
    }
    return removed;
}

} // namespace dkt
