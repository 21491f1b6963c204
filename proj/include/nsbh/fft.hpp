/// @file fft.hpp
/// @brief Thin FFTW3 wrapper: cached plans, out-of-place complex transforms.
///
/// Plans are cached per (Nh, Nv, direction) under a mutex; execution uses
/// fftw_execute_dft on caller-owned buffers, which FFTW documents as
/// re-entrant, so concurrent transforms on distinct buffers are safe.
/// Plans are created with FFTW_ESTIMATE | FFTW_UNALIGNED: ESTIMATE keeps
/// planning deterministic (no timing-dependent algorithm choice) and
/// UNALIGNED makes the plan valid for any properly sized buffer pair.

#pragma once

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include "nsbh/grid.hpp"

namespace nsbh {
namespace detail {

inline fftw_plan acquire_plan(const AnisoGrid& g, int sign) {
    static std::mutex mtx;
    static std::map<std::tuple<int, int, int>, fftw_plan> cache;
    std::lock_guard<std::mutex> lock(mtx);
    const auto key = std::make_tuple(g.Nh, g.Nv, sign);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    std::vector<complexd> a(g.size()), b(g.size());
    fftw_plan p = fftw_plan_dft_3d(
        g.Nh, g.Nh, g.Nv, reinterpret_cast<fftw_complex*>(a.data()),
        reinterpret_cast<fftw_complex*>(b.data()), sign,
        FFTW_ESTIMATE | FFTW_UNALIGNED);
    cache.emplace(key, p);
    return p;
}

} // namespace detail

/// Unnormalized DFT, out of place.  sign = FFTW_FORWARD (-1) or
/// FFTW_BACKWARD (+1).  in and out must be distinct buffers of g.size().
inline void dft3(const AnisoGrid& g, const complexd* in, complexd* out, int sign) {
    fftw_plan p = detail::acquire_plan(g, sign);
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(const_cast<complexd*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
}

} // namespace nsbh
