#include <doctest.h>

#include "h2net/errors.hpp"
#include "h2net/semistable.hpp"
#include "support.hpp"

using namespace h2net;
using namespace h2net::testing;

namespace {

SecondOrderNetwork floating_network(std::mt19937_64& rng, Index n) {
  const Matrix L = random_laplacian(rng, n);
  Matrix F = Matrix::Zero(n, 1);
  F(0, 0) = 1.0;
  Matrix H = Matrix::Zero(2, n);
  H(0, n - 1) = 1.0;
  H(1, 1) = 1.0;
  return SecondOrderNetwork(Vector::Zero(n), L, 0.8, 0.2, F, H);
}

}  // namespace

TEST_CASE("split of a floating network") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const Index n = 3 + trial;
    const SecondOrderNetwork net = floating_network(rng, n);
    const SemistableSplit s = split(net);
    REQUIRE(s.kernel_dim() == 1);
    CHECK((net.K() * s.S0).norm() < 1e-10);
    CHECK(s.S0.sum() > 0.0);
    Matrix S(n, n);
    S << s.S0, s.S1;
    CHECK(near(S.transpose() * S, Matrix::Identity(n, n), 1e-10));
    CHECK(linalg::min_eigenvalue(s.Kbar) > 0.0);
    CHECK(near(s.average.D0, net.alpha() * Matrix::Identity(1, 1), 1e-10));
    // Reassembly: S blkdiag(0, Kbar) S^T = K.
    CHECK(near(s.S1 * s.Kbar * s.S1.transpose(), net.K(), 1e-9));
  }
}

TEST_CASE("recombined transfer function equals the original") {
  std::mt19937_64 rng(4);
  const SecondOrderNetwork net = floating_network(rng, 7);
  const SemistableSplit s = split(net);
  const SecondOrderSystem both = recombine(s.average, s.stable);
  CHECK(both.order() == 7);
  for (double w : {0.05, 0.3, 1.0, 4.0, 20.0}) {
    const std::complex<double> jw(0.0, w);
    CHECK((both.transfer(jw) - net.system().transfer(jw)).norm() < 1e-9);
    CHECK((s.average.system().transfer(jw) + s.stable.transfer(jw) - net.system().transfer(jw)).norm() <
          1e-9);
  }
}

TEST_CASE("split error cases") {
  std::mt19937_64 rng(5);
  const SecondOrderNetwork grounded = random_network(rng, 5);
  try {
    split(grounded);
    FAIL("expected FullyStable");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::FullyStable);
  }
  Vector v = Vector::Zero(4);
  v(0) = -3.0;
  SecondOrderNetwork indefinite(v, ring_laplacian(4), 1.0, 0.0, Matrix::Ones(4, 1), Matrix::Ones(1, 4));
  try {
    split(indefinite);
    FAIL("expected NotSemistable");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotSemistable);
  }
}

TEST_CASE("disconnected graph has a larger kernel") {
  Matrix L = Matrix::Zero(5, 5);
  L.topLeftCorner(2, 2) = path_laplacian(2);
  L.bottomRightCorner(3, 3) = ring_laplacian(3);
  SecondOrderNetwork net(Vector::Zero(5), L, 1.0, 0.1, Matrix::Ones(5, 1), Matrix::Ones(1, 5));
  const SemistableSplit s = split(net);
  CHECK(s.kernel_dim() == 2);
  CHECK(near(s.S0.transpose() * s.S0, Matrix::Identity(2, 2), 1e-12));
}
