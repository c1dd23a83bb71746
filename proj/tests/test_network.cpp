#include <doctest.h>

#include <sstream>

#include "h2net/errors.hpp"
#include "h2net/network_io.hpp"
#include "support.hpp"

using namespace h2net;
using namespace h2net::testing;

TEST_CASE("mass-spring-damper example is a valid network") {
  const SecondOrderNetwork net = build_msd_example();
  const ValidationReport rep = validate(net);
  CHECK(rep.ok());
  CHECK(net.nodes() == 4);
  CHECK(near(net.D(), Matrix::Identity(4, 4), 0.0));
  Matrix K(4, 4);
  K << 4, -1, 0, -2, -1, 4, -2, -1, 0, -2, 3, -1, -2, -1, -1, 4;
  CHECK(near(net.K(), K, 0.0));
}

TEST_CASE("state space and transfer function agree") {
  std::mt19937_64 rng(2);
  const SecondOrderSystem sys = random_network(rng, 6).system();
  const StateSpace ss = sys.state_space();
  const std::complex<double> s(0.3, 1.7);
  const Index n2 = ss.A.rows();
  const ComplexMatrix G1 =
      ss.C.cast<std::complex<double>>() *
      (s * ComplexMatrix::Identity(n2, n2) - ss.A.cast<std::complex<double>>())
          .partialPivLu()
          .solve(ss.B.cast<std::complex<double>>());
  CHECK((G1 - sys.transfer(s)).norm() < 1e-12);
}

TEST_CASE("validation names each failing invariant") {
  Matrix L = ring_laplacian(5);
  SecondOrderNetwork floating(Vector::Zero(5), L, 1.0, 0.1, Matrix::Ones(5, 1), Matrix::Ones(1, 5));
  const ValidationReport rep = validate(floating);
  CHECK_FALSE(rep.ok());
  REQUIRE(rep.find("k_positive_definite"));
  CHECK_FALSE(rep.find("k_positive_definite")->passed);
  CHECK(rep.find("k_positive_definite")->detail.find("K*1 = 0") != std::string::npos);

  L(0, 1) = 0.5;
  const LaplacianCheck lc = check_laplacian(L);
  CHECK_FALSE(lc.symmetric);
  CHECK_FALSE(lc.valid());

  Vector v = Vector::Zero(5);
  v(0) = 1;
  SecondOrderNetwork neg_alpha(v, ring_laplacian(5), -1.0, 0.1, Matrix::Ones(5, 1), Matrix::Ones(1, 5));
  CHECK_FALSE(validate(neg_alpha).find("alpha_positive")->passed);
}

TEST_CASE("disconnected laplacian is detected") {
  Matrix L = Matrix::Zero(4, 4);
  L.topLeftCorner(2, 2) = path_laplacian(2);
  L.bottomRightCorner(2, 2) = path_laplacian(2);
  const LaplacianCheck lc = check_laplacian(L);
  CHECK(lc.valid());
  CHECK_FALSE(lc.connected);
}

TEST_CASE("grounded construction") {
  const SecondOrderNetwork net = build_grounded_system(path_laplacian(5), 0.97, 0.15);
  CHECK(validate(net).ok());
  CHECK(net.v_diag()(0) == 1.0);
  CHECK(net.v_diag().tail(4).isZero());
  CHECK(near(net.H(), net.K() - net.F() * net.F().transpose(), 0.0));
  CHECK(near(net.D(), 0.97 * Matrix::Identity(5, 5) + 0.15 * net.K(), 1e-15));
  CHECK(net.system().damping.has_value());
}

TEST_CASE("explicit damping override") {
  SecondOrderNetwork base = build_grounded_system(ring_laplacian(4));
  Matrix D = base.D();
  SecondOrderNetwork same(base.v_diag(), base.laplacian(), base.alpha(), base.beta(), base.F(), base.H(), D);
  CHECK(same.damping_is_proportional());
  CHECK(validate(same).ok());
  D(0, 0) += 0.5;
  SecondOrderNetwork other(base.v_diag(), base.laplacian(), base.alpha(), base.beta(), base.F(), base.H(), D);
  CHECK_FALSE(other.damping_is_proportional());
  CHECK_FALSE(other.system().damping.has_value());
  CHECK_FALSE(validate(other).find("damping_proportional")->passed);
}

TEST_CASE("holme-kim generator is deterministic and connected") {
  const Matrix a = generate_powerlaw_cluster(60, 2, 0.5, 42);
  const Matrix b = generate_powerlaw_cluster(60, 2, 0.5, 42);
  const Matrix c = generate_powerlaw_cluster(60, 2, 0.5, 43);
  CHECK(a == b);
  CHECK(a != c);
  const LaplacianCheck lc = check_laplacian(a);
  CHECK(lc.valid());
  CHECK(lc.connected);
  // Every node after the seed set adds m edges.
  const double edges = a.diagonal().sum() / 2.0;
  CHECK(edges == doctest::Approx(2.0 * (60 - 2)));
  for (Index i = 0; i < 60; ++i)
    for (Index j = 0; j < 60; ++j)
      if (i != j) CHECK((a(i, j) == 0.0 || a(i, j) == -1.0));
}

TEST_CASE("holme-kim triad probability raises clustering") {
  auto triangles = [](const Matrix& L) {
    const Matrix A = (L.array() < 0).cast<double>().matrix();
    return (A * A * A).trace() / 6.0;
  };
  double low = 0, high = 0;
  for (std::uint64_t s = 0; s < 5; ++s) {
    low += triangles(generate_powerlaw_cluster(80, 2, 0.0, s));
    high += triangles(generate_powerlaw_cluster(80, 2, 0.9, s));
  }
  CHECK(high > 2 * low);
}

TEST_CASE("holme-kim argument checks") {
  CHECK_THROWS_AS(generate_powerlaw_cluster(2, 1, 0.5, 1), Error);
  CHECK_THROWS_AS(generate_powerlaw_cluster(10, 10, 0.5, 1), Error);
  CHECK_THROWS_AS(generate_powerlaw_cluster(10, 2, 1.5, 1), Error);
}

TEST_CASE("json round trip is exact") {
  std::mt19937_64 rng(4);
  const SecondOrderNetwork net = random_network(rng, 7);
  const SecondOrderNetwork back = network_from_json(parse_json_text(network_to_json(net).dump()));
  CHECK(back == net);

  SecondOrderNetwork with_d(net.v_diag(), net.laplacian(), net.alpha(), net.beta(), net.F(), net.H(),
                            net.D() + Matrix::Identity(7, 7));
  CHECK(network_from_json(network_to_json(with_d)) == with_d);
}

TEST_CASE("json errors carry location and field") {
  try {
    parse_json_text("{\n  \"n\": 3,\n  oops\n}");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  nlohmann::json j = network_to_json(build_msd_example());
  j.erase("L");
  try {
    network_from_json(j);
    FAIL("expected a schema error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SchemaError);
    CHECK(std::string(e.what()).find("L") != std::string::npos);
  }
  j = network_to_json(build_msd_example());
  j["F"] = {{1.0}, {2.0}};
  CHECK_THROWS_AS(network_from_json(j), Error);
}

TEST_CASE("matrix market round trip") {
  const Matrix L = generate_powerlaw_cluster(15, 2, 0.3, 9);
  std::stringstream ss;
  write_matrix_market(ss, L);
  CHECK(ss.str().rfind("%%MatrixMarket matrix coordinate real symmetric", 0) == 0);
  const Matrix back = read_matrix_market(ss);
  CHECK(back == L);

  std::istringstream bad("%%MatrixMarket matrix array real general\n2 2\n1\n0\n0\n1\n");
  CHECK_THROWS_AS(read_matrix_market(bad), Error);
}

TEST_CASE("missing file is an io error") {
  try {
    read_text_file("/nonexistent/net.json");
    FAIL("expected an io error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IoError);
  }
}
