/// @file io.hpp
/// @brief On-disk formats: a documented little-endian binary for field
///        snapshots, CSV emission for time series (printf "%.17g" so repeated
///        runs are byte-identical), JSON (vendored nlohmann) for manifests and
///        verdicts, and timestamp+seed run directories.
///
/// Snapshot format, version 1 (all integers little-endian):
///   bytes 0..3   magic "NSBS"
///   u32          version (= 1)
///   u32 Nh, u32 Nv
///   f64 Lh, f64 Lv, f64 t
///   u32 ncomp (= 4: u1, u2, u3, rho)
///   ncomp * Nh*Nh*Nv * (f64 re, f64 im)   coefficients in index order
///                                         p = (i1*Nh + i2)*Nv + i3
///
/// Wall-clock time never enters CSV/JSON artifacts (it goes to a separate
/// plain-text timing file) so identical config + seed reproduce every CSV and
/// JSON byte for byte.

#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "nsbh/solver.hpp"
#include "nsbh/uniqueness.hpp"

namespace nsbh {

using json = nlohmann::json;

inline constexpr const char* tool_version = "1.0.0";

// ===========================================================================
// Binary snapshots
// ===========================================================================

namespace detail {

inline void put_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 4);
}

inline void put_f64(std::ostream& os, double v) {
    std::uint64_t u;
    std::memcpy(&u, &v, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((u >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 8);
}

inline std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    if (!is) throw std::runtime_error("snapshot: truncated file (u32)");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

inline double get_f64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    if (!is) throw std::runtime_error("snapshot: truncated file (f64)");
    std::uint64_t u = 0;
    for (int i = 0; i < 8; ++i) u |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    double v;
    std::memcpy(&v, &u, 8);
    return v;
}

} // namespace detail

inline void write_snapshot(const std::string& path, const State& st) {
    const AnisoGrid& g = st.u.grid();
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("write_snapshot: cannot open " + path);
    os.write("NSBS", 4);
    detail::put_u32(os, 1);
    detail::put_u32(os, static_cast<std::uint32_t>(g.Nh));
    detail::put_u32(os, static_cast<std::uint32_t>(g.Nv));
    detail::put_f64(os, g.Lh);
    detail::put_f64(os, g.Lv);
    detail::put_f64(os, st.t);
    detail::put_u32(os, 4);
    for (const SpectralField* f : {&st.u.c1, &st.u.c2, &st.u.c3, &st.rho})
        for (const complexd& z : f->coeffs()) {
            detail::put_f64(os, z.real());
            detail::put_f64(os, z.imag());
        }
    if (!os) throw std::runtime_error("write_snapshot: write failed for " + path);
}

inline State read_snapshot(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("read_snapshot: cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "NSBS", 4) != 0)
        throw std::runtime_error("read_snapshot: " + path + " is not a snapshot file");
    const std::uint32_t version = detail::get_u32(is);
    if (version != 1)
        throw std::runtime_error("read_snapshot: unsupported version " +
                                 std::to_string(version));
    const int Nh = static_cast<int>(detail::get_u32(is));
    const int Nv = static_cast<int>(detail::get_u32(is));
    const real Lh = detail::get_f64(is);
    const real Lv = detail::get_f64(is);
    const real t = detail::get_f64(is);
    const std::uint32_t ncomp = detail::get_u32(is);
    if (ncomp != 4)
        throw std::runtime_error("read_snapshot: expected 4 components, found " +
                                 std::to_string(ncomp));
    const AnisoGrid g{Nh, Nv, Lh, Lv};
    State st;
    st.t = t;
    st.u = VectorField(g);
    st.rho = SpectralField(g);
    for (SpectralField* f : {&st.u.c1, &st.u.c2, &st.u.c3, &st.rho})
        for (complexd& z : f->coeffs()) {
            const double re = detail::get_f64(is);
            const double im = detail::get_f64(is);
            z = complexd{re, im};
        }
    return st;
}

// ===========================================================================
// CSV
// ===========================================================================

/// Deterministic CSV: one header line, then "%.17g"-formatted columns.
class CsvWriter {
  public:
    CsvWriter(const std::string& path, const std::vector<std::string>& columns)
        : os_(path), ncols_(columns.size()) {
        if (!os_) throw std::runtime_error("CsvWriter: cannot open " + path);
        for (std::size_t i = 0; i < columns.size(); ++i) {
            if (i) os_ << ',';
            os_ << columns[i];
        }
        os_ << '\n';
    }

    void row(const std::vector<real>& vals) {
        if (vals.size() != ncols_)
            throw std::invalid_argument("CsvWriter: row width mismatch");
        char buf[32];
        for (std::size_t i = 0; i < vals.size(); ++i) {
            if (i) os_ << ',';
            std::snprintf(buf, sizeof buf, "%.17g", vals[i]);
            os_ << buf;
        }
        os_ << '\n';
    }

    void close() { os_.close(); }

  private:
    std::ofstream os_;
    std::size_t ncols_;
};

inline void write_ledger_csv(const std::string& path, const EnergyLedger& led) {
    CsvWriter csv(path, {"t", "u_l2sq", "int_gradh_u_l2sq", "rho_l2sq", "int_gradh_rho_l2sq",
                         "u_h0s", "rho_h0delta", "u_h1", "omega_over_r_l2", "u_energy_lhs",
                         "u_energy_rhs", "rho_energy_lhs", "rho_energy_rhs", "u_ok", "rho_ok"});
    for (const LedgerRow& r : led.rows)
        csv.row({r.t, r.u_l2sq, r.gradh_u_int, r.rho_l2sq, r.gradh_rho_int, r.u_h0s, r.rho_h0d,
                 r.u_h1, r.omega_r_l2, r.u_energy_lhs, r.u_energy_rhs, r.rho_energy_lhs,
                 r.rho_energy_rhs, r.u_ok ? 1.0 : 0.0, r.rho_ok ? 1.0 : 0.0});
}

inline void write_difference_csv(const std::string& path, const DifferenceSeries& ds) {
    std::vector<std::string> cols{"t",    "w2", "th2", "gw2", "gth2", "chi", "f", "f1"};
    for (int i = 1; i <= 9; ++i) cols.push_back("L" + std::to_string(i));
    CsvWriter csv(path, cols);
    for (const DifferenceRow& r : ds.rows) {
        std::vector<real> vals{r.t, r.w2, r.th2, r.gw2, r.gth2, r.chi, r.f, r.f1};
        for (real L : r.L) vals.push_back(L);
        csv.row(vals);
    }
}

// ===========================================================================
// JSON helpers
// ===========================================================================

inline json grid_json(const AnisoGrid& g) {
    return json{{"Nh", g.Nh}, {"Nv", g.Nv}, {"Lh", g.Lh}, {"Lv", g.Lv}};
}

inline json config_json(const SolverConfig& cfg) {
    return json{{"grid", grid_json(cfg.grid)},
                {"n_cutoff", cfg.n_cutoff},
                {"dt", cfg.dt},
                {"t_end", cfg.t_end},
                {"s_index", cfg.s_index},
                {"delta_index", cfg.delta_index},
                {"record_every", cfg.record_every},
                {"dealias", cfg.dealias},
                {"certified", cfg.certified},
                {"c0", cfg.c0}};
}

inline void write_json(const std::string& path, const json& j) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_json: cannot open " + path);
    os << j.dump(2) << '\n';
}

// ===========================================================================
// Run directories and manifests
// ===========================================================================

/// <base>/<YYYYMMDD-HHMMSS>-seed<seed>; base from arg or $NSB_RUN_DIR or ".".
inline std::string make_run_dir(const std::string& base_arg, std::uint64_t seed) {
    std::string base = base_arg;
    if (base.empty()) {
        const char* env = std::getenv("NSB_RUN_DIR");
        base = env ? env : ".";
    }
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char stamp[32];
    std::snprintf(stamp, sizeof stamp, "%04d%02d%02d-%02d%02d%02d", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
    std::string dir = base + "/" + stamp + "-seed" + std::to_string(seed);
    // never silently merge into an existing run directory
    std::string candidate = dir;
    int k = 1;
    while (std::filesystem::exists(candidate)) candidate = dir + "-" + std::to_string(k++);
    std::filesystem::create_directories(candidate);
    return candidate;
}

/// Accumulates the per-run manifest; every output file registers here.
class ManifestBuilder {
  public:
    ManifestBuilder(std::string run_dir, std::string subcommand, std::uint64_t seed)
        : run_dir_(std::move(run_dir)), start_(std::chrono::steady_clock::now()) {
        m_["tool_version"] = tool_version;
        m_["subcommand"] = std::move(subcommand);
        m_["seed"] = seed;
        m_["outputs"] = json::array();
    }

    void set(const std::string& key, const json& value) { m_[key] = value; }

    /// Register (and return) an output path inside the run directory.
    std::string output(const std::string& filename) {
        m_["outputs"].push_back(filename);
        return run_dir_ + "/" + filename;
    }

    const std::string& run_dir() const { return run_dir_; }

    /// Writes manifest.json (deterministic) and timing.txt (wall clock only).
    void finish() {
        m_["outputs"].push_back("manifest.json");
        m_["outputs"].push_back("timing.txt");
        write_json(run_dir_ + "/manifest.json", m_);
        const auto dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_);
        std::ofstream os(run_dir_ + "/timing.txt");
        os << "wall_clock_seconds " << dt.count() << '\n';
    }

  private:
    std::string run_dir_;
    json m_;
    std::chrono::steady_clock::time_point start_;
};

} // namespace nsbh
