#include "biharm/banded.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "biharm/errors.hpp"

namespace biharm {

BandedMatrix::BandedMatrix(int n, int kl, int ku)
    : n_(n), kl_(kl), ku_(ku), ld_(2 * kl + ku + 1),
      ab_(static_cast<std::size_t>((2 * kl + ku + 1) * n), 0.0), ipiv_(static_cast<std::size_t>(n)) {}

void BandedMatrix::add(int i, int j, double v) {
    if (!in_band(i, j)) {
        std::ostringstream os;
        os << "entry (" << i << ", " << j << ") lies outside the band";
        throw SolverError(os.str(), 0);
    }
    at(i, j) += v;
}

double BandedMatrix::get(int i, int j) const { return in_band(i, j) ? at(i, j) : 0.0; }

std::vector<double> BandedMatrix::multiply(const std::vector<double>& x) const {
    std::vector<double> y(static_cast<std::size_t>(n_), 0.0);
    for (int i = 0; i < n_; ++i)
        for (int j = std::max(0, i - kl_); j <= std::min(n_ - 1, i + ku_); ++j)
            y[static_cast<std::size_t>(i)] += at(i, j) * x[static_cast<std::size_t>(j)];
    return y;
}

void BandedMatrix::factor() {
    double anorm = 0;
    for (int j = 0; j < n_; ++j) {
        double s = 0;
        for (int i = std::max(0, j - ku_); i <= std::min(n_ - 1, j + kl_); ++i) s += std::abs(at(i, j));
        anorm = std::max(anorm, s);
    }
    const lapack_int info =
        LAPACKE_dgbtrf(LAPACK_COL_MAJOR, n_, n_, kl_, ku_, ab_.data(), ld_, ipiv_.data());
    if (info < 0) throw SolverError("dgbtrf rejected its arguments", 0);
    if (info > 0) {
        std::ostringstream os;
        os << "banded system singular: zero pivot at row " << info << " of " << n_;
        throw SolverError(os.str(), 0);
    }
    double rc = 0;
    LAPACKE_dgbcon(LAPACK_COL_MAJOR, '1', n_, kl_, ku_, ab_.data(), ld_, ipiv_.data(), anorm, &rc);
    rcond_ = rc;
    if (!(rc > 1e-15)) {
        std::ostringstream os;
        os << "banded system numerically singular, rcond = " << rc;
        throw SolverError(os.str(), rc);
    }
    factored_ = true;
}

void BandedMatrix::solve_in_place(std::vector<double>& b) const {
    if (!factored_) throw SolverError("solve before factor", 0);
    const lapack_int info = LAPACKE_dgbtrs(LAPACK_COL_MAJOR, 'N', n_, kl_, ku_, 1, ab_.data(), ld_,
                                           ipiv_.data(), b.data(), n_);
    if (info != 0) throw SolverError("dgbtrs failed", rcond_);
}

} // namespace biharm
