#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "dwl/linalg.hpp"
#include "dwl/tolerances.hpp"

using namespace dwl;

namespace {

RealMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    RealMatrix m(rows.size(), rows.begin()->size());
    std::size_t i = 0;
    for (const auto& r : rows) {
        std::size_t j = 0;
        for (double v : r) m(i, j++) = v;
        ++i;
    }
    return m;
}

RealMatrix random_spd(SeededRng& rng, std::size_t n) {
    RealMatrix b = gaussian_matrix(rng, n, n, 0.0, 1.0);
    RealMatrix a = matmul_tn(b, b);
    for (std::size_t i = 0; i < n; ++i) a(i, i) += static_cast<double>(n);
    return a;
}

RealMatrix random_symmetric(SeededRng& rng, std::size_t n) {
    RealMatrix b = gaussian_matrix(rng, n, n, 0.0, 1.0);
    RealMatrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a(i, j) = 0.5 * (b(i, j) + b(j, i));
    return a;
}

RealMatrix random_orthonormal(SeededRng& rng, std::size_t rows, std::size_t cols) {
    return thin_qr(gaussian_matrix(rng, rows, cols, 0.0, 1.0)).q;
}

}  // namespace

TEST_CASE("cholesky: scalar diagonal case") {
    RealMatrix a = scaled(RealMatrix::identity(3), 4.0);
    SpdFactor f = cholesky_factor(a);
    CHECK(max_abs_diff(f.lower, scaled(RealMatrix::identity(3), 2.0)) == 0.0);
}

TEST_CASE("cholesky: hand recurrence on 2x2") {
    // lower = [[sqrt(2), 0], [1/sqrt(2), sqrt(3/2)]]
    SpdFactor f = cholesky_factor(from_rows({{2, 1}, {1, 2}}));
    CHECK(f.lower(0, 0) == doctest::Approx(1.41421356).epsilon(1e-8));
    CHECK(f.lower(0, 1) == 0.0);
    CHECK(f.lower(1, 0) == doctest::Approx(0.70710678).epsilon(1e-8));
    CHECK(f.lower(1, 1) == doctest::Approx(1.22474487).epsilon(1e-8));
}

TEST_CASE("cholesky: indefinite input rejected") {
    CHECK_THROWS_AS(cholesky_factor(from_rows({{1, 2}, {2, 1}})), NotSpd);
    CHECK_THROWS_AS(cholesky_factor(RealMatrix(3, 3)), NotSpd);
}

TEST_CASE("cholesky: factor reconstructs input") {
    SeededRng rng(11);
    for (int trial = 0; trial < 5; ++trial) {
        RealMatrix a = random_spd(rng, 6);
        SpdFactor f = cholesky_factor(a);
        RealMatrix rec = matmul_nt(f.lower, f.lower);
        CHECK(frobenius_norm(add_scaled(rec, -1.0, a)) / frobenius_norm(a) < 1e-10);
        for (std::size_t i = 0; i < 6; ++i) CHECK(f.lower(i, i) > 0.0);
    }
}

TEST_CASE("spd_solve: trivial and residual oracle") {
    RealMatrix a2 = scaled(RealMatrix::identity(4), 2.0);
    RealMatrix b = from_rows({{1}, {2}, {3}, {4}});
    RealMatrix x = spd_solve(cholesky_factor(a2), b);
    CHECK(x(2, 0) == doctest::Approx(1.5));

    RealMatrix a = from_rows({{2, 1}, {1, 2}});
    RealMatrix b2 = from_rows({{3}, {3}});
    RealMatrix x2 = spd_solve(cholesky_factor(a), b2);
    CHECK(x2(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(x2(1, 0) == doctest::Approx(1.0).epsilon(1e-12));

    SeededRng rng(5);
    RealMatrix a5 = random_spd(rng, 5);
    RealMatrix rhs = gaussian_matrix(rng, 5, 3, 0.0, 1.0);
    RealMatrix sol = spd_solve(cholesky_factor(a5), rhs);
    RealMatrix resid = add_scaled(matmul(a5, sol), -1.0, rhs);
    CHECK(frobenius_norm(resid) / frobenius_norm(rhs) < 1e-10);

    CHECK_THROWS_AS(spd_solve(cholesky_factor(a5), RealMatrix(4, 1, 1.0)), DimMismatch);
}

TEST_CASE("spd_inverse: diagonal and identity-residual oracle") {
    RealMatrix inv = spd_inverse(cholesky_factor(scaled(RealMatrix::identity(4), 2.0)));
    CHECK(max_abs_diff(inv, scaled(RealMatrix::identity(4), 0.5)) < 1e-14);

    RealMatrix d = from_rows({{1, 0, 0}, {0, 2, 0}, {0, 0, 4}});
    RealMatrix dinv = spd_inverse(cholesky_factor(d));
    CHECK(dinv(0, 0) == doctest::Approx(1.0));
    CHECK(dinv(1, 1) == doctest::Approx(0.5));
    CHECK(dinv(2, 2) == doctest::Approx(0.25));

    SeededRng rng(7);
    RealMatrix a = random_spd(rng, 6);
    RealMatrix ainv = spd_inverse(cholesky_factor(a));
    RealMatrix should_be_i = matmul(a, ainv);
    CHECK(frobenius_norm(add_scaled(should_be_i, -1.0, RealMatrix::identity(6))) < 1e-9);
    CHECK(is_symmetric(ainv, 1e-12));
}

TEST_CASE("thin_qr: already orthonormal input") {
    RealMatrix a(5, 3);
    for (std::size_t j = 0; j < 3; ++j) a(j, j) = 1.0;
    QrResult qr = thin_qr(a);
    CHECK(max_abs_diff(qr.q, a) < 1e-14);
    CHECK(max_abs_diff(qr.r, RealMatrix::identity(3)) < 1e-14);
}

TEST_CASE("thin_qr: permutation case with sign convention") {
    QrResult qr = thin_qr(from_rows({{0, 1}, {1, 0}, {0, 0}}));
    CHECK(qr.r(0, 0) >= 0.0);
    CHECK(qr.r(1, 1) >= 0.0);
    // columns must be e2 and e1 once signs are fixed
    CHECK(qr.q(1, 0) == doctest::Approx(1.0));
    CHECK(qr.q(0, 1) == doctest::Approx(1.0));
    CHECK(std::fabs(qr.q(2, 0)) < 1e-14);
}

TEST_CASE("thin_qr: reconstruction and orthonormality oracle") {
    SeededRng rng(23);
    RealMatrix a = gaussian_matrix(rng, 10, 4, 0.0, 1.0);
    QrResult qr = thin_qr(a);
    RealMatrix rec = matmul(qr.q, qr.r);
    CHECK(frobenius_norm(add_scaled(rec, -1.0, a)) / frobenius_norm(a) < 1e-10);
    RealMatrix g = matmul_tn(qr.q, qr.q);
    CHECK(frobenius_norm(add_scaled(g, -1.0, RealMatrix::identity(4))) < 1e-10);
    for (std::size_t j = 0; j < 4; ++j) CHECK(qr.r(j, j) >= 0.0);
    for (std::size_t i = 1; i < 4; ++i)
        for (std::size_t j = 0; j < i; ++j) CHECK(qr.r(i, j) == 0.0);
}

TEST_CASE("thin_qr: rank-deficient input rejected") {
    RealMatrix a(6, 3);
    for (std::size_t i = 0; i < 6; ++i) {
        a(i, 0) = static_cast<double>(i + 1);
        a(i, 1) = 2.0 * static_cast<double>(i + 1);
        a(i, 2) = 1.0 / static_cast<double>(i + 1);
    }
    CHECK_THROWS_AS(thin_qr(a), RankDeficient);
    CHECK_THROWS_AS(thin_qr(RealMatrix(4, 2)), RankDeficient);
}

TEST_CASE("sym_eig: diagonal and 2x2 swap") {
    EigResult e = sym_eig(from_rows({{3, 0, 0}, {0, 1, 0}, {0, 0, 2}}));
    CHECK(e.values[0] == doctest::Approx(1.0));
    CHECK(e.values[1] == doctest::Approx(2.0));
    CHECK(e.values[2] == doctest::Approx(3.0));

    EigResult e2 = sym_eig(from_rows({{0, 1}, {1, 0}}));
    CHECK(e2.values[0] == doctest::Approx(-1.0));
    CHECK(e2.values[1] == doctest::Approx(1.0));
}

TEST_CASE("sym_eig: residual oracle on random symmetric") {
    SeededRng rng(31);
    for (int trial = 0; trial < 4; ++trial) {
        RealMatrix a = random_symmetric(rng, 8);
        EigResult e = sym_eig(a);
        const double scale = frobenius_norm(a);
        for (std::size_t i = 0; i < 8; ++i) {
            std::vector<double> v = column(e.vectors, i);
            RealMatrix vm(8, 1);
            set_column(vm, 0, v);
            RealMatrix av = matmul(a, vm);
            RealMatrix lv = scaled(vm, e.values[i]);
            CHECK(frobenius_norm(add_scaled(av, -1.0, lv)) < 1e-9 * scale);
        }
        RealMatrix g = matmul_tn(e.vectors, e.vectors);
        CHECK(frobenius_norm(add_scaled(g, -1.0, RealMatrix::identity(8))) < 1e-9);
        // eigenvalue sum matches trace
        double sum = 0.0;
        for (double v : e.values) sum += v;
        CHECK(std::fabs(sum - trace(a)) < 1e-9 * std::max(1.0, scale));
        // ascending order
        for (std::size_t i = 1; i < 8; ++i) CHECK(e.values[i] >= e.values[i - 1]);
    }
}

TEST_CASE("principal_angles: identical, orthogonal, in-span rotation") {
    SeededRng rng(41);
    RealMatrix u = random_orthonormal(rng, 7, 3);
    auto self = principal_angles(u, u);
    for (double a : self) CHECK(a < 1e-7);

    RealMatrix e1(3, 1), e2(3, 1);
    e1(0, 0) = 1.0;
    e2(1, 0) = 1.0;
    auto perp = principal_angles(e1, e2);
    CHECK(perp[0] == doctest::Approx(std::numbers::pi / 2));

    // rotate u within its own span: angles must stay zero
    RealMatrix rot = random_orthonormal(rng, 3, 3);
    RealMatrix u2 = matmul(u, rot);
    auto rotated = principal_angles(u, u2);
    for (double a : rotated) CHECK(a < 1e-7);

    // symmetry of the arguments
    RealMatrix w = random_orthonormal(rng, 7, 2);
    auto ab = principal_angles(u, w);
    auto ba = principal_angles(w, u);
    REQUIRE(ab.size() == ba.size());
    for (std::size_t i = 0; i < ab.size(); ++i)
        CHECK(ab[i] == doctest::Approx(ba[i]).epsilon(1e-9));

    CHECK_THROWS_AS(principal_angles(gaussian_matrix(rng, 7, 2, 0.0, 1.0), w),
                    NotOrthonormal);
}

TEST_CASE("gaussian_matrix: degenerate, determinism, moments") {
    SeededRng rng(3);
    RealMatrix flat = gaussian_matrix(rng, 4, 4, 2.5, 0.0);
    CHECK(max_abs_diff(flat, RealMatrix(4, 4, 2.5)) == 0.0);

    SeededRng r1(99), r2(99);
    RealMatrix a = gaussian_matrix(r1, 8, 8, 0.0, 1.0);
    RealMatrix b = gaussian_matrix(r2, 8, 8, 0.0, 1.0);
    CHECK(a == b);

    SeededRng r3(1234);
    RealMatrix big = gaussian_matrix(r3, 100, 100, 0.0, 1.0);
    double mean = 0.0;
    for (double v : big.values()) mean += v;
    mean /= static_cast<double>(big.size());
    double var = 0.0;
    for (double v : big.values()) var += (v - mean) * (v - mean);
    var /= static_cast<double>(big.size());
    CHECK(std::fabs(mean) < 0.05);
    CHECK(std::fabs(std::sqrt(var) - 1.0) < 0.05);
}

TEST_CASE("solve round-trip property: random spd recovers x") {
    SeededRng rng(77);
    for (int trial = 0; trial < 8; ++trial) {
        RealMatrix a = random_spd(rng, 5);
        RealMatrix x = gaussian_matrix(rng, 5, 1, 0.0, 1.0);
        RealMatrix b = matmul(a, x);
        RealMatrix got = spd_solve(cholesky_factor(a), b);
        CHECK(frobenius_norm(add_scaled(got, -1.0, x)) / frobenius_norm(x) < 1e-9);
    }
}
