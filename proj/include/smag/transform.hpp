// FFT bridge between real-basis coefficients and padded physical samples.
//
// Complex bookkeeping: w_hat(l) = (c_l - i c_{-l}) / sqrt(2) for canonical l
// (l1 > 0, or l1 = 0 and l2 > 0), w_hat(-l) = conj, so that
// omega(x) = sum_l w_hat(l) exp(+2 pi i l.x) reproduces
// sum c_l e_l with e_l the cos/sin basis. Forward transforms normalize by
// 1/np^2; inverse transforms evaluate the trigonometric interpolant exactly.
#pragma once

#include <map>
#include <utility>

#include "smag/field.hpp"
#include "smag/grid.hpp"

struct fftw_plan_s;

namespace smag {

// Owns FFTW plans and scratch buffers, one instance per thread. Plan
// creation is internally serialized; execution is safe concurrently across
// distinct Workspace instances.
class Workspace {
  public:
    Workspace() = default;
    ~Workspace();
    Workspace(const Workspace&) = delete;
    Workspace& operator=(const Workspace&) = delete;

    // Evaluate the interpolant on the grid's padded size, or an explicit one.
    PhysicalField to_physical(const SpectralField& f);
    PhysicalField to_physical(const SpectralField& f, int np);

    // Project samples onto the retained modes (quadrature of coefficients).
    SpectralField to_spectral(const PhysicalField& s, const GridSpec& grid);

    // Full-spectrum spectral derivatives (d/dx1, d/dx2) of arbitrary grid
    // samples, Nyquist row zeroed. Used for compositions f(omega) whose
    // bandwidth exceeds the retained mask.
    std::pair<PhysicalField, PhysicalField> derivative_samples(const PhysicalField& s);

  private:
    struct SizePlans {
        double* real = nullptr;
        void* cplx = nullptr;  // fftw_complex[np * (np/2 + 1)]
        fftw_plan_s* fwd = nullptr;
        fftw_plan_s* bwd = nullptr;
    };

    SizePlans& plans_for(int np);

    std::map<int, SizePlans> plans_;
};

}  // namespace smag
