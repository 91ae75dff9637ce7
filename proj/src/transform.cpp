#include "smag/transform.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <cstring>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace smag {

namespace {

constexpr double kSqrtHalf = 0.70710678118654752440;
constexpr double kSqrtTwo = 1.41421356237309504880;
constexpr double kTwoPi = 6.28318530717958647692528676656;

// The FFTW planner is not thread-safe; executions are.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace

Workspace::~Workspace() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    for (auto& [np, sp] : plans_) {
        fftw_destroy_plan(sp.fwd);
        fftw_destroy_plan(sp.bwd);
        fftw_free(sp.real);
        fftw_free(sp.cplx);
    }
}

Workspace::SizePlans& Workspace::plans_for(int np) {
    auto it = plans_.find(np);
    if (it != plans_.end()) return it->second;

    std::lock_guard<std::mutex> lock(planner_mutex());
    SizePlans sp;
    sp.real = fftw_alloc_real(static_cast<size_t>(np) * np);
    sp.cplx = fftw_alloc_complex(static_cast<size_t>(np) * (np / 2 + 1));
    if (!sp.real || !sp.cplx) throw std::bad_alloc();
    // FFTW_ESTIMATE always: measured planning picks timing-dependent
    // algorithms whose rounding differs between processes, which would break
    // the bit-exact re-run guarantee of the run manifests.
    const unsigned flags = FFTW_ESTIMATE;
    auto* c = static_cast<fftw_complex*>(sp.cplx);
    sp.fwd = fftw_plan_dft_r2c_2d(np, np, sp.real, c, flags);
    sp.bwd = fftw_plan_dft_c2r_2d(np, np, c, sp.real, flags);
    if (!sp.fwd || !sp.bwd) throw std::runtime_error("transform: FFTW planning failed");
    return plans_.emplace(np, sp).first->second;
}

PhysicalField Workspace::to_physical(const SpectralField& f) {
    return to_physical(f, f.grid().padded());
}

PhysicalField Workspace::to_physical(const SpectralField& f, int np) {
    const GridSpec& g = f.grid();
    if (np < 2 * g.max_mode + 2)
        throw std::invalid_argument("to_physical: grid too small for the retained modes");
    SizePlans& sp = plans_for(np);
    auto* c = static_cast<std::complex<double>*>(sp.cplx);
    const size_t ncplx = static_cast<size_t>(np) * (np / 2 + 1);
    std::memset(sp.cplx, 0, ncplx * sizeof(std::complex<double>));

    const int half = np / 2 + 1;
    const int m = g.max_mode;
    // one pass over canonical representatives; each carries its sin partner
    for (int l1 = 0; l1 <= m; ++l1) {
        for (int l2 = -m; l2 <= m; ++l2) {
            if (!(l1 > 0 || l2 > 0)) continue;
            if (!g.contains(l1, l2)) continue;
            const std::complex<double> what(f.coeff(l1, l2) * kSqrtHalf,
                                            -f.coeff(-l1, -l2) * kSqrtHalf);
            if (l2 > 0) {
                c[static_cast<size_t>(l1) * half + l2] = what;
            } else if (l2 < 0) {
                c[static_cast<size_t>(np - l1) * half - l2] = std::conj(what);
            } else {  // l2 == 0, l1 > 0: fill both redundant column-0 slots
                c[static_cast<size_t>(l1) * half] = what;
                c[static_cast<size_t>(np - l1) * half] = std::conj(what);
            }
        }
    }

    fftw_execute(sp.bwd);
    PhysicalField out;
    out.np = np;
    out.v.assign(sp.real, sp.real + static_cast<size_t>(np) * np);
    return out;
}

SpectralField Workspace::to_spectral(const PhysicalField& s, const GridSpec& grid) {
    const int np = s.np;
    if (np < 2 * grid.max_mode + 2)
        throw std::invalid_argument("to_spectral: sample grid too small for the cutoff");
    if (s.v.size() != static_cast<size_t>(np) * np)
        throw std::invalid_argument("to_spectral: sample count does not match np^2");
    SizePlans& sp = plans_for(np);
    std::memcpy(sp.real, s.v.data(), s.v.size() * sizeof(double));
    fftw_execute(sp.fwd);
    auto* c = static_cast<std::complex<double>*>(sp.cplx);

    const int half = np / 2 + 1;
    const double norm = 1.0 / (static_cast<double>(np) * np);
    SpectralField out(grid);
    const int m = grid.max_mode;
    for (int l1 = 0; l1 <= m; ++l1) {
        for (int l2 = -m; l2 <= m; ++l2) {
            if (!(l1 > 0 || l2 > 0)) continue;
            if (!grid.contains(l1, l2)) continue;
            const std::complex<double> what =
                l2 >= 0 ? c[static_cast<size_t>(l1) * half + l2] * norm
                        : std::conj(c[static_cast<size_t>(np - l1) * half - l2]) * norm;
            out.set_coeff(l1, l2, kSqrtTwo * what.real());
            out.set_coeff(-l1, -l2, -kSqrtTwo * what.imag());
        }
    }
    return out;
}

std::pair<PhysicalField, PhysicalField> Workspace::derivative_samples(const PhysicalField& s) {
    const int np = s.np;
    SizePlans& sp = plans_for(np);
    std::memcpy(sp.real, s.v.data(), s.v.size() * sizeof(double));
    fftw_execute(sp.fwd);
    auto* c = static_cast<std::complex<double>*>(sp.cplx);
    const int half = np / 2 + 1;
    const double norm = 1.0 / (static_cast<double>(np) * np);
    std::vector<std::complex<double>> spectrum(c, c + static_cast<size_t>(np) * half);

    PhysicalField d1, d2;
    for (int component = 0; component < 2; ++component) {
        for (int m1 = 0; m1 < np; ++m1) {
            const int f1 = m1 <= np / 2 ? m1 : m1 - np;
            for (int m2 = 0; m2 < half; ++m2) {
                int fj = component == 0 ? f1 : m2;
                if (std::abs(fj) == np / 2) fj = 0;  // odd symbol vanishes at Nyquist
                const std::complex<double> mult(0.0, kTwoPi * fj * norm);
                c[static_cast<size_t>(m1) * half + m2] =
                    spectrum[static_cast<size_t>(m1) * half + m2] * mult;
            }
        }
        fftw_execute(sp.bwd);
        PhysicalField& dst = component == 0 ? d1 : d2;
        dst.np = np;
        dst.v.assign(sp.real, sp.real + static_cast<size_t>(np) * np);
    }
    return {std::move(d1), std::move(d2)};
}

}  // namespace smag
