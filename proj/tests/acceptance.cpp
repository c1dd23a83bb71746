// Acceptance run: one [PASS]/[FAIL] line per criterion, details indented
// below it. Exit status is nonzero when any criterion fails.

#include <chrono>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "cli.hpp"
#include "h2net/errors.hpp"
#include "h2net/network_io.hpp"
#include "h2net/reconstruct.hpp"
#include "h2net/reduction.hpp"
#include "h2net/semistable.hpp"
#include "support.hpp"

using namespace h2net;
using namespace h2net::testing;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::ostringstream notes;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      notes << "    failed: " << what << "\n";
    }
  }
};

Matrix rows4(std::initializer_list<double> xs, Index cols) {
  Matrix M(static_cast<Index>(xs.size()) / cols, cols);
  Index k = 0;
  for (double x : xs) {
    M(k / cols, k % cols) = x;
    ++k;
  }
  return M;
}

Vector spectrum(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

double perm_distance(const Matrix& A, const Matrix& B) {
  std::vector<Index> p(A.rows());
  for (Index i = 0; i < A.rows(); ++i) p[i] = i;
  double best = std::numeric_limits<double>::infinity();
  do {
    double worst = 0;
    for (Index i = 0; i < A.rows(); ++i)
      for (Index j = 0; j < A.cols(); ++j) worst = std::max(worst, std::abs(A(p[i], p[j]) - B(i, j)));
    best = std::min(best, worst);
  } while (std::next_permutation(p.begin(), p.end()));
  return best;
}

void ac1(Outcome& o) {
  const auto t0 = Clock::now();
  const ReducedModel red = spectral_model(spectrum({9.5631, 7.727, 5.1027, 4.1776}));
  ReconstructOptions opts;
  opts.tail = TailOrder::Ascending;
  opts.t_tolerance = 1e-3;
  opts.snap_t = true;

  const Matrix T1 = rows4({0.5, -0.1845, 0.6826, 0.5, 0.1845, -0.6826, -0.5, -0.6826, -0.1845}, 3);
  const Matrix K4 = rows4({6.246, 0, -0.4625, -1.6059, 0, 7.039, -2.3989, -0.4625, -0.4625, -2.3989,
                           7.039, 0, -1.6059, -0.4625, 0, 6.2460},
                          4);
  const double d1 = (reconstruct(red, TFactor{T1}, opts).Kr - K4).cwiseAbs().maxCoeff();

  opts.require_mmatrix = false;
  const Matrix T2 = rows4({0, 0.309, -0.809, -0.809, 0, 0.309, 0.309, -0.809, 0}, 3);
  const Matrix K4bar = rows4({6.6426, -1.6301, 0.4579, -1.2928, -1.6301, 8.0412, -1.3463, -0.8873,
                              0.4579, -1.3463, 5.2973, -0.2313, -1.2928, -0.8873, -0.2313, 6.5889},
                             4);
  const double d2 = (reconstruct(red, TFactor{T2}, opts).Kr - K4bar).cwiseAbs().maxCoeff();
  const double t = seconds_since(t0);
  o.notes << "    sparse K4 max |delta| = " << d1 << ", complete K4 max |delta| = " << d2
          << ", runtime " << t << " s\n";
  o.require(d1 <= 2e-3, "sparse K4 entrywise 2e-3");
  o.require(d2 <= 2e-3, "complete K4 entrywise 2e-3");
  o.require(t < 1.0, "runtime under 1 s");
}

void ac2(Outcome& o) {
  const auto t0 = Clock::now();
  const ReducedModel red = spectral_model(spectrum({0.4384, 2, 4.5616, 7}));
  const SparsityResult sr = solve_sparsity(red, {{0, 3}, {2, 3}});
  const GraphRealization g = reconstruct(red, sr.t);
  const Matrix KrEx =
      rows4({3, -1, -1.5614, 0, -1, 5, -1, -2.5615, -1.5614, -1, 3, 0, 0, -2.5615, 0, 3}, 4);
  const double d = perm_distance(g.Kr, KrEx);

  const Matrix Khat = rows4({5, -1, -1, -2, -1, 2, 0, -1, -1, 0, 2, -1, -2, -1, -1, 5}, 4);
  const HouseholderResult h = householder_tridiag(Khat);
  const Matrix Kt = rows4({5, -2.4495, 0, 0, -2.4495, 2.6667, -1.8856, 0, 0, -1.8856, 4.3333, 0, 0, 0,
                           0, 2},
                          4);
  const double dh = (h.Ktilde - Kt).cwiseAbs().maxCoeff();
  const double t = seconds_since(t0);
  o.notes << "    sparsity residual " << sr.residual << " (start " << sr.start_index
          << "), max |delta| up to permutation = " << d << "\n"
          << "    householder max |delta| = " << dh << ", diag_dominant = " << h.diag_dominant
          << ", runtime " << t << " s\n";
  o.require(d <= 2e-3, "sparse realization matches printed Kr");
  o.require(dh <= 2e-3, "tridiagonal form matches");
  o.require(!h.diag_dominant, "tridiagonal form flagged as not diagonally dominant");
  o.require(t < 10.0, "runtime under 10 s");
}

struct BoundCase {
  Index n, r;
  SecondOrderNetwork net;
  std::optional<ReducedModel> red;
  std::string failure;
};

std::vector<BoundCase>& bound_cases() {
  static std::vector<BoundCase> cases = [] {
    std::vector<BoundCase> out;
    std::mt19937_64 rng(2024);
    for (int k = 0; k < 24; ++k) {
      const Index n = 4 + k % 9;
      const Index r = 1 + static_cast<Index>(rng() % static_cast<std::uint64_t>(n - 1));
      SecondOrderNetwork net = random_network(rng, n);
      BoundCase c{n, r, net, std::nullopt, {}};
      if (!validate(net).ok()) {
        c.failure = "network failed validation";
      } else {
        try {
          c.red = reduce(net, r);
        } catch (const Error& e) {
          c.failure = e.what();
        }
      }
      out.push_back(std::move(c));
    }
    return out;
  }();
  return cases;
}

void ac3(Outcome& o) {
  const auto t0 = Clock::now();
  auto& cases = bound_cases();
  int solved = 0, within = 0, unavailable = 0, indefinite = 0;
  double worst_excess = 0.0;
  for (const auto& c : cases) {
    if (!c.red) {
      o.require(false, "n=" + std::to_string(c.n) + " r=" + std::to_string(c.r) + ": " + c.failure);
      continue;
    }
    ++solved;
    const ReducedModel& red = *c.red;
    if (!(linalg::min_eigenvalue(red.Kr_hat) > 0.0 && linalg::min_eigenvalue(red.Dr_hat) > 0.0)) ++indefinite;
    try {
      const H2Report rep = certified_error(c.net.system(), red);
      const double excess = rep.actual * rep.actual - red.gamma;
      worst_excess = std::max(worst_excess, excess);
      if (excess <= 1e-6) ++within;
    } catch (const Error& e) {
      ++unavailable;
      if (unavailable <= 3)
        o.notes << "    n=" << c.n << " r=" << c.r << ": error not computable: " << e.what() << "\n";
    }
  }
  const double t = seconds_since(t0);
  o.notes << "    " << cases.size() << " networks, " << solved << " optimal solves, " << within
          << " within actual^2 <= gamma + 1e-6, " << unavailable
          << " with a reduced model too close to marginal stability to evaluate, worst excess "
          << worst_excess << ", " << indefinite << " with Kr or Dr not positive definite, runtime " << t
          << " s\n";
  o.require(cases.size() >= 20, "at least 20 networks");
  o.require(within == solved, "bound holds on every optimal solve");
  o.require(indefinite == 0, "Kr_hat and Dr_hat positive definite");
  o.require(t < 300.0, "runtime under 5 min");
}

void ac4(Outcome& o) {
  double worst = 0.0;
  int checked = 0;
  for (const auto& c : bound_cases()) {
    if (!c.red) continue;
    const ReducedModel& red = *c.red;
    const Index r = red.r;
    const Matrix prop = c.net.alpha() * Matrix::Identity(r, r) + c.net.beta() * red.Kr_hat;
    worst = std::max(worst, (red.Dr_hat - prop).norm() / red.Dr_hat.norm());
    ++checked;
  }
  o.notes << "    " << checked << " reduced models, worst ||Dr - alpha I - beta Kr|| / ||Dr|| = " << worst
          << "\n";
  o.require(checked > 0, "reduced models available");
  o.require(worst <= 1e-8, "proportional damping preserved to 1e-8");
}

void ac5(Outcome& o) {
  std::mt19937_64 rng(555);
  int pass = 0;
  double worst_h2 = 0.0;
  for (int k = 0; k < 100; ++k) {
    const Index r = 2 + k % 7;
    const Index n = r + 1 + k % 4;
    const SecondOrderNetwork net = random_network(rng, n);
    const ReducedModel red = project(net.system(), random_orthogonal(rng, n).leftCols(r));
    const GraphRealization g = reconstruct(red, helmert_t_factor(r));
    const Vector a = linalg::sym_eig(red.Kr_hat, EigenOrder::Ascending).values;
    const Vector b = linalg::sym_eig(0.5 * (g.Kr + g.Kr.transpose()), EigenOrder::Ascending).values;
    bool ok = (g.Ur * g.Ur.transpose() - Matrix::Identity(r, r)).cwiseAbs().maxCoeff() <= 1e-10;
    ok = ok && (a - b).cwiseAbs().maxCoeff() <= 1e-9;
    ok = ok && (g.Kr * Vector::Ones(r) - g.lambda_r * Vector::Ones(r)).cwiseAbs().maxCoeff() <= 1e-9;
    double off = -std::numeric_limits<double>::infinity();
    for (Index i = 0; i < r; ++i)
      for (Index j = 0; j < r; ++j)
        if (i != j) off = std::max(off, g.Kr(i, j));
    ok = ok && off <= 1e-10;
    const double h_before = linalg::h2_norm(red.system().state_space());
    const double h_after = linalg::h2_norm(g.system().state_space());
    const double rel = std::abs(h_after - h_before) / std::max(1e-300, h_before);
    worst_h2 = std::max(worst_h2, rel);
    ok = ok && rel <= 1e-8;
    pass += ok;
  }
  o.notes << "    " << pass << "/100 reconstructions satisfy every invariant, worst relative H2 change "
          << worst_h2 << "\n";
  o.require(pass == 100, "all 100 reconstructions");
}

void ac6(Outcome& o) {
  std::mt19937_64 rng(66);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const Index n = 1 + k % 10;
    const Matrix A = random_hurwitz(rng, n);
    const Matrix B = random_matrix(rng, n, 1 + k % 3);
    const Matrix Q = B * B.transpose();
    const Matrix P = linalg::solve_lyapunov(A, Q).P;
    const Matrix R = kron_lyapunov(A, Q);
    worst = std::max(worst, (P - R).norm() / std::max(1e-300, R.norm()));
  }
  o.notes << "    worst relative difference over 100 instances " << worst << "\n";
  o.require(worst <= 1e-8, "agreement to 1e-8");
}

void ac7(Outcome& o) {
  const Index n = 8;
  Matrix F = Matrix::Zero(n, 1);
  F(0, 0) = 1.0;
  const SecondOrderNetwork net(Vector::Zero(n), ring_laplacian(n), 0.97, 0.15, F, F.transpose());
  const SemistableSplit s = split(net);
  Matrix S(n, n);
  S << s.S0, s.S1;
  Matrix blk = Matrix::Zero(n, n);
  blk.bottomRightCorner(n - 1, n - 1) = s.Kbar;
  const double reassembly = (S * blk * S.transpose() - net.K()).cwiseAbs().maxCoeff();
  o.notes << "    split-reassembly defect " << reassembly << "\n";
  o.require(reassembly <= 1e-9, "split-reassembly identity to 1e-9");

  SdpCertificate cert;
  const ReducedModel red = reduce(s.stable, 3, {}, false, &cert);
  const SecondOrderSystem composite = recombine(s.average, red.system());
  const SecondOrderSystem full = net.system();
  double worst_identity = 0.0, peak = 0.0;
  for (int k = 0; k < 20; ++k) {
    const double w = std::pow(10.0, -2.0 + 4.0 * k / 19.0);
    const std::complex<double> jw(0.0, w);
    const ComplexMatrix e = full.transfer(jw) - composite.transfer(jw);
    const ComplexMatrix es = s.stable.transfer(jw) - red.system().transfer(jw);
    worst_identity = std::max(worst_identity, (e - es).norm() / std::max(1e-12, es.norm()));
    peak = std::max(peak, e.norm());
  }
  o.notes << "    gamma " << cert.gamma << " (bound " << std::sqrt(cert.gamma) << "), peak sampled error "
          << peak << ", composite vs stable-part error mismatch " << worst_identity << "\n";
  o.require(worst_identity <= 1e-9, "composite error equals the stable-part error");
  try {
    const H2Report rep = certified_error(s.stable, red);
    o.notes << "    stable-part H2 error " << rep.actual << "\n";
    o.require(rep.within_bound, "stable-part H2 error within the certified bound");
  } catch (const Error& e) {
    o.require(false, std::string("stable-part H2 error not computable: ") + e.what());
  }
}

void ac8(Outcome& o) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "h2net_acceptance";
  fs::create_directories(dir);
  const std::string net = (dir / "hk30.json").string(), report = (dir / "hk30_sweep.json").string();
  std::ostringstream out, err;
  int code = cli::run({"generate", "--model", "holme-kim", "--n", "30", "--m", "2", "--p-triangle", "0.5",
                       "--seed", "7", "--alpha", "0.97", "--beta", "0.15", "--out", net},
                      out, err);
  o.require(code == 0, "generate: " + err.str());
  if (code != 0) return;

  const SecondOrderSystem sys = load_network(net).system();
  const StateSpace ss = sys.state_space();
  const LyapunovSolution gram = linalg::solve_lyapunov(ss.A, ss.B * ss.B.transpose());
  const double rel_residual = gram.residual_norm / std::max(1.0, (ss.B * ss.B.transpose()).norm());
  o.notes << "    full-model H2 norm " << std::sqrt((ss.C * gram.P * ss.C.transpose()).trace())
          << ", relative Lyapunov residual " << rel_residual << "\n";
  o.require(rel_residual <= 1e-8, "full-model Lyapunov residual 1e-8");

  code = cli::run({"sweep", "--in", net, "--orders", "2:10:2", "--json", report}, out, err);
  o.require(code == 0, "sweep exit code " + std::to_string(code));
  const auto j = parse_json_text(read_text_file(report));
  int optimal = 0, ok = 0;
  for (const auto& row : j["rows"]) {
    o.notes << "    r=" << row["r"] << " " << row["status"].get<std::string>() << " bound "
            << row["certified_bound"] << " actual " << row["actual_h2_error"];
    if (row.contains("error")) o.notes << " (" << row["error"].get<std::string>() << ")";
    o.notes << "\n";
    if (row["status"] != "optimal") continue;
    ++optimal;
    if (!row["actual_h2_error"].is_null() &&
        row["certified_bound"].get<double>() >= row["actual_h2_error"].get<double>())
      ++ok;
  }
  o.require(optimal > 0, "at least one optimal row");
  o.require(ok == optimal, "certified bound >= actual error on every optimal row");
}

}  // namespace

int main() {
  const std::vector<std::pair<int, std::function<void(Outcome&)>>> criteria = {
      {1, ac1}, {2, ac2}, {3, ac3}, {4, ac4}, {5, ac5}, {6, ac6}, {7, ac7}, {8, ac8}};
  std::cout << std::setprecision(6);
  int failed = 0;
  for (const auto& [id, fn] : criteria) {
    Outcome o;
    try {
      fn(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    std::cout << (o.pass ? "[PASS]" : "[FAIL]") << " AC" << id << "\n" << o.notes.str() << std::flush;
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
