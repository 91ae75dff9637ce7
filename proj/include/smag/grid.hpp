// Spectral grid bookkeeping for zero-mean fields on the torus [0,1]^2.
//
// State lives in the real trigonometric basis
//   e_l = sqrt(2) cos(2 pi l.x)  for l in Z2+ (l1 > 0, or l1 = 0 and l2 > 0),
//   e_l = sqrt(2) sin(2 pi (-l).x) for l in Z2- = -Z2+,
// retained up to the Galerkin cutoff. The projector mask is radial |l| <=
// max_mode by default, matching the analysis; a square mask is available.
// Pointwise products are evaluated on a grid oversampled by `pad`.
#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace smag {

enum class MaskKind { radial, square };

struct GridSpec {
    int n = 64;                        // nominal resolution
    int max_mode = 31;                 // Galerkin cutoff
    double pad = 2.0;                  // oversampling factor for products
    MaskKind mask = MaskKind::radial;

    // Canonical cutoff for a given n: the largest mode set a length-n grid
    // represents without Nyquist ambiguity.
    static GridSpec square_of(int n, double pad = 2.0, MaskKind mask = MaskKind::radial) {
        GridSpec g;
        g.n = n;
        g.max_mode = n / 2 - 1;
        g.pad = pad;
        g.mask = mask;
        g.validate();
        return g;
    }

    int side() const { return 2 * max_mode + 1; }

    // Padded physical grid size: even, at least pad*n, and wide enough that
    // every retained mode is an exact grid frequency.
    int padded() const {
        int p = static_cast<int>(std::ceil(pad * n));
        p += p % 2;
        const int floor_modes = 2 * max_mode + 2;
        return p < floor_modes ? floor_modes : p;
    }

    bool contains(int l1, int l2) const {
        if (l1 == 0 && l2 == 0) return false;
        if (mask == MaskKind::square)
            return std::abs(l1) <= max_mode && std::abs(l2) <= max_mode;
        return l1 * l1 + l2 * l2 <= max_mode * max_mode;
    }

    bool operator==(const GridSpec& o) const {
        return n == o.n && max_mode == o.max_mode && pad == o.pad && mask == o.mask;
    }

    void validate() const {
        if (n < 4) throw std::invalid_argument("grid: n must be at least 4");
        if (max_mode < 1) throw std::invalid_argument("grid: max_mode must be positive");
        if (2 * max_mode >= n)
            throw std::invalid_argument("grid: max_mode must satisfy max_mode < n/2");
        if (!(pad >= 1.0))
            throw std::invalid_argument("grid: pad must be at least 1");
    }
};

}  // namespace smag
