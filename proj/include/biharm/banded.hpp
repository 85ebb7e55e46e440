#pragma once

#include <vector>

namespace biharm {

// Square banded matrix in LAPACK general-band storage with room for the
// fill-in of partial pivoting. Factorization and solves go through LAPACK.
class BandedMatrix {
public:
    BandedMatrix(int n, int kl, int ku);

    int n() const { return n_; }
    int kl() const { return kl_; }
    int ku() const { return ku_; }

    void add(int i, int j, double v);
    double get(int i, int j) const;
    bool in_band(int i, int j) const { return j - i <= ku_ && i - j <= kl_; }

    // y = A x (only valid before factor()).
    std::vector<double> multiply(const std::vector<double>& x) const;

    // LU with partial pivoting. Throws SolverError with a reciprocal
    // condition estimate when the matrix is singular or nearly so.
    void factor();
    bool factored() const { return factored_; }
    double rcond() const { return rcond_; }
    void solve_in_place(std::vector<double>& b) const;

private:
    int n_, kl_, ku_, ld_;
    std::vector<double> ab_;
    std::vector<int> ipiv_;
    bool factored_ = false;
    double rcond_ = 0;
    double& at(int i, int j) { return ab_[static_cast<std::size_t>(j * ld_ + kl_ + ku_ + i - j)]; }
    double at(int i, int j) const { return ab_[static_cast<std::size_t>(j * ld_ + kl_ + ku_ + i - j)]; }
};

} // namespace biharm
