#pragma once

#include <cstdint>
#include <random>

#include "formcalc/linalg.hpp"

namespace formcalc::random {

using Engine = std::mt19937_64;

double uniform(Engine& rng, double lo, double hi);
cplx gaussian_complex(Engine& rng);
CVector gaussian_vector(Engine& rng, Index n);
CMatrix gaussian_matrix(Engine& rng, Index rows, Index cols);
CVector unit_vector(Engine& rng, Index n);

/// Hermitian positive definite with eigenvalues drawn from [lo, hi].
CMatrix hermitian_pd(Engine& rng, Index n, double lo = 0.5, double hi = 5.0);

/// Hermitian PSD with exact rank r (eigenvalues in [lo, hi] on the range).
CMatrix hermitian_psd_rank(Engine& rng, Index n, Index rank, double lo = 0.5, double hi = 5.0);

CMatrix unitary(Engine& rng, Index n);

}  // namespace formcalc::random
