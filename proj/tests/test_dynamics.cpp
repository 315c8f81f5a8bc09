#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "nambu/dynamics.hpp"
#include "nambu/functionals.hpp"
#include "nambu/matrix.hpp"

using namespace nambu;
using Catch::Matchers::WithinAbs;

namespace {

const Complex I{0.0, 1.0};

DensityMatrix pure_normalized(int d, std::uint64_t seed) {
  const DensityMatrix p = random_density(d, 1, seed);
  return DensityMatrix(p.mat() / p.mat().trace().real());
}

HermitianMatrix unit_hermitian(int d, std::uint64_t seed) {
  const HermitianMatrix h = random_hermitian(d, seed);
  return hermitize(h.mat() / max_abs(h.mat()));
}

double casimir_drift(const Trajectory& traj) {
  double worst = 0.0;
  for (const auto& row : traj.diagnostics)
    for (int n = 0; n < 4; ++n)
      worst = std::max(worst, std::abs(row.casimirs[n] - traj.diagnostics[0].casimirs[n]));
  return worst;
}

double eigenvalue_drift(const Trajectory& traj) {
  double worst = 0.0;
  for (const auto& row : traj.diagnostics)
    worst = std::max(worst, (row.eigenvalues - traj.diagnostics[0].eigenvalues)
                                .cwiseAbs()
                                .maxCoeff());
  return worst;
}

}  // namespace

TEST_CASE("step_rk4 local error against the exact linear flow") {
  const DensityMatrix rho0 = random_density(3, 3, 1);
  const HermitianMatrix hh = unit_hermitian(3, 2);
  const Functional h = linear_observable(hh);
  const Functional s = casimir_function_preset("c2_half");

  const double e1 = max_abs(step_rk4(rho0, 1e-2, h, s).mat() -
                            linear_reference(rho0, hh, 1e-2).mat());
  const double e2 = max_abs(step_rk4(rho0, 5e-3, h, s).mat() -
                            linear_reference(rho0, hh, 5e-3).mat());
  // local truncation is O(dt^5): halving dt must shrink the error ~32x
  CHECK(e1 < 1e-10);
  CHECK(e1 / e2 > 20.0);
}

TEST_CASE("step_rk4 keeps stationary states fixed") {
  ComplexMatrix hd = ComplexMatrix::Zero(3, 3);
  hd.diagonal() << 1.0, 2.0, 3.0;
  ComplexMatrix rd = ComplexMatrix::Zero(3, 3);
  rd.diagonal() << 0.5, 0.3, 0.2;
  const DensityMatrix rho0(rd);
  const DensityMatrix out =
      step_rk4(rho0, 1e-2, linear_observable(HermitianMatrix(hd)), renyi_a(3.0));
  CHECK(max_abs(out.mat() - rho0.mat()) <= 1e-14);
}

TEST_CASE("step_rk4 on a pure state matches the linear step for alpha = 3") {
  const DensityMatrix rho0 = pure_normalized(4, 3);
  const HermitianMatrix hh = unit_hermitian(4, 4);
  const DensityMatrix out = step_rk4(rho0, 1e-3, linear_observable(hh), renyi_a(3.0));
  CHECK(max_abs(out.mat() - linear_reference(rho0, hh, 1e-3).mat()) <= 1e-10);
}

TEST_CASE("step_isospectral conserves the spectrum over 1000 steps") {
  DensityMatrix rho = random_density(4, 4, 5);
  const RealVector p0 = eig_hermitian(rho).eigenvalues;
  const Functional h = linear_observable(random_hermitian(4, 6));
  const Functional s = renyi_a(3.0);
  for (int k = 0; k < 1000; ++k) rho = step_isospectral(rho, 0.01, h, s);
  const RealVector p1 = eig_hermitian(rho).eigenvalues;
  CHECK((p1 - p0).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("step_isospectral with S = C2/2 is the exact linear conjugation") {
  const DensityMatrix rho0 = random_density(4, 4, 7);
  const HermitianMatrix hh = random_hermitian(4, 8);
  const Functional h = linear_observable(hh);
  const Functional s = casimir_function_preset("c2_half");
  for (double dt : {0.01, 0.5}) {
    const DensityMatrix out = step_isospectral(rho0, dt, h, s);
    CHECK(max_abs(out.mat() - linear_reference(rho0, hh, dt).mat()) <= 1e-13);
  }
}

TEST_CASE("step_isospectral agrees with rk4 across methods") {
  const DensityMatrix rho0 = random_density(2, 2, 9);
  const Functional h = linear_observable(random_hermitian(2, 10));
  const Functional s = renyi_a(3.0);
  const Trajectory a = evolve(rho0, {h, s, 1.0, 1e-4, Method::rk4});
  const Trajectory b = evolve(rho0, {h, s, 1.0, 1e-4, Method::isospectral});
  CHECK(max_abs(a.states.back().mat() - b.states.back().mat()) <= 1e-6);
}

TEST_CASE("step_isospectral rejects unsupported generators") {
  const DensityMatrix rho0 = random_density(3, 3, 11);
  const Functional lin = linear_observable(random_hermitian(3, 12));
  CHECK_THROWS_AS(step_isospectral(rho0, 0.01, lin, lin), std::runtime_error);
  CHECK_THROWS_AS(step_isospectral(rho0, 0.01, casimir(2), renyi_a(2.0)),
                  std::invalid_argument);
}

TEST_CASE("evolve keeps pure states pure under renyi_a(4)") {
  ComplexMatrix sz(2, 2);
  sz << 1, 0, 0, -1;
  const DensityMatrix rho0 = pure_normalized(2, 13);
  const Trajectory traj = evolve(
      rho0, {linear_observable(HermitianMatrix(sz)), renyi_a(4.0), 5.0, 1e-3, Method::rk4});
  double drift = 0.0;
  for (const auto& row : traj.diagnostics)
    drift = std::max(drift, std::abs(row.casimirs[1] - 1.0));
  CHECK(drift <= 1e-9);
}

TEST_CASE("evolve conserves Casimirs with the isospectral method") {
  const DensityMatrix rho0 = random_density(4, 4, 14);
  const Functional h = linear_observable(random_hermitian(4, 15));
  const Trajectory traj = evolve(rho0, {h, renyi_a(3.0), 5.0, 0.01, Method::isospectral});
  CHECK(casimir_drift(traj) <= 1e-10);
  CHECK(eigenvalue_drift(traj) <= 1e-10);
}

TEST_CASE("evolve commutes with state rescaling") {
  const DensityMatrix rho0 = random_density(3, 3, 16);
  const Functional h = linear_observable(random_hermitian(3, 17));
  const Functional s = renyi_a(2.5);
  const Trajectory base = evolve(rho0, {h, s, 2.0, 1e-3, Method::rk4});
  for (double lam : {0.5, 2.0}) {
    const Trajectory scaled =
        evolve(DensityMatrix(lam * rho0.mat()), {h, s, 2.0, 1e-3, Method::rk4});
    CHECK(max_abs(scaled.states.back().mat() - lam * base.states.back().mat()) <= 1e-8);
  }
}

TEST_CASE("evolve aborts with the offending step index on blowup") {
  const DensityMatrix rho0 = random_density(3, 3, 18);
  const Functional h = linear_observable(random_hermitian(3, 19));
  // a gigantic rk4 step drives the state far outside the PSD cone
  CHECK_THROWS_WITH(evolve(rho0, {h, renyi_a(3.0), 5000.0, 1000.0, Method::rk4}),
                    Catch::Matchers::ContainsSubstring("step"));
}

TEST_CASE("linear_reference basics and Bloch rotation") {
  const DensityMatrix rho0 = random_density(3, 3, 20);
  const HermitianMatrix hh = random_hermitian(3, 21);
  CHECK(max_abs(linear_reference(rho0, hh, 0.0).mat() - rho0.mat()) <= 1e-14);

  ComplexMatrix hd = ComplexMatrix::Zero(2, 2);
  hd.diagonal() << 0.7, 0.2;
  ComplexMatrix rd = ComplexMatrix::Zero(2, 2);
  rd.diagonal() << 0.4, 0.6;
  CHECK(max_abs(linear_reference(DensityMatrix(rd), HermitianMatrix(hd), 3.0).mat() - rd) <=
        1e-14);

  // Hhat = sigma_x rotates (1 + sigma_z)/2 into (1 - sigma_z)/2 at t = pi/2
  ComplexMatrix sx(2, 2);
  sx << 0, 1, 1, 0;
  ComplexMatrix up = ComplexMatrix::Zero(2, 2);
  up(0, 0) = 1.0;
  ComplexMatrix down = ComplexMatrix::Zero(2, 2);
  down(1, 1) = 1.0;
  const DensityMatrix rot = linear_reference(DensityMatrix(up), HermitianMatrix(sx),
                                             std::acos(-1.0) / 2.0);
  CHECK(max_abs(rot.mat() - down) <= 1e-13);
}

TEST_CASE("observable_rate closed form") {
  const DensityMatrix rho = random_density(2, 2, 22);
  const HermitianMatrix hh = random_hermitian(2, 23);
  const HermitianMatrix id{ComplexMatrix::Identity(2, 2)};
  CHECK_THAT(observable_rate(id, hh, rho, 3.0), WithinAbs(0.0, 1e-13));
  CHECK_THAT(observable_rate(hh, hh, rho, 3.0), WithinAbs(0.0, 1e-13));
  CHECK_THROWS_AS(observable_rate(hh, hh, rho, 1.0), std::domain_error);
}

TEST_CASE("observable_rate matches the differentiated trajectory") {
  ComplexMatrix sx(2, 2);
  sx << 0, 1, 1, 0;
  const HermitianMatrix fhat(sx);
  const DensityMatrix rho0 = random_density(2, 2, 24);
  const HermitianMatrix hh = random_hermitian(2, 25);
  const double alpha = 3.0;
  const Trajectory traj =
      evolve(rho0, {linear_observable(hh), renyi_a(alpha), 0.02, 1e-3, Method::rk4});
  // centered difference of Tr(F rho(t)) at t = 0.01 (step 10)
  const double fp = (fhat.mat() * traj.states[11].mat()).trace().real();
  const double fm = (fhat.mat() * traj.states[9].mat()).trace().real();
  const double numeric = (fp - fm) / (2.0 * 1e-3);
  const double closed = observable_rate(fhat, hh, traj.states[10], alpha);
  CHECK_THAT(numeric, WithinAbs(closed, 1e-6));
}

TEST_CASE("rk4 global error drops by at least 14x when dt halves") {
  const DensityMatrix rho0 = random_density(3, 3, 26);
  const HermitianMatrix hh = unit_hermitian(3, 27);
  const Functional h = linear_observable(hh);
  const Functional s = casimir_function_preset("c2_half");
  const DensityMatrix ref = linear_reference(rho0, hh, 2.0);
  const Trajectory coarse = evolve(rho0, {h, s, 2.0, 0.05, Method::rk4});
  const Trajectory fine = evolve(rho0, {h, s, 2.0, 0.025, Method::rk4});
  const double e1 = max_abs(coarse.states.back().mat() - ref.mat());
  const double e2 = max_abs(fine.states.back().mat() - ref.mat());
  REQUIRE(e2 > 1e-14);  // above the roundoff floor
  CHECK(e1 / e2 >= 14.0);
}

TEST_CASE("isospectral evolution is time reversible") {
  const DensityMatrix rho0 = random_density(4, 4, 28);
  const HermitianMatrix hh = random_hermitian(4, 29);
  const Functional s = renyi_a(3.0);
  const Trajectory fwd =
      evolve(rho0, {linear_observable(hh), s, 1.0, 1e-3, Method::isospectral});
  const Trajectory back = evolve(
      fwd.states.back(),
      {linear_observable(hermitize(-hh.mat())), s, 1.0, 1e-3, Method::isospectral});
  CHECK(max_abs(back.states.back().mat() - rho0.mat()) <= 1e-8);
}

TEST_CASE("energy is conserved for linear H") {
  const DensityMatrix rho0 = random_density(4, 4, 30);
  const Functional h = linear_observable(random_hermitian(4, 31));
  for (auto method : {Method::isospectral, Method::rk4}) {
    const Trajectory traj = evolve(rho0, {h, renyi_a(3.0), 2.0, 1e-3, method});
    double drift = 0.0;
    for (const auto& row : traj.diagnostics)
      drift = std::max(drift, std::abs(row.h_value - traj.diagnostics[0].h_value));
    CHECK(drift <= (method == Method::isospectral ? 1e-10 : 1e-6));
  }
}

TEST_CASE("diagnostics_table layout and reference deviation") {
  ComplexMatrix hd = ComplexMatrix::Zero(2, 2);
  hd.diagonal() << 1.0, -1.0;
  ComplexMatrix rd = ComplexMatrix::Zero(2, 2);
  rd.diagonal() << 0.7, 0.3;
  const DensityMatrix rho0(rd);
  const Functional h = linear_observable(HermitianMatrix(hd));

  // stationary run: every column constant
  const Trajectory stat = evolve(rho0, {h, renyi_a(3.0), 0.1, 0.01, Method::rk4});
  const DiagnosticsTable table = diagnostics_table(stat);
  REQUIRE(table.columns.size() == 4 + 1 + 2 + 2 + 1);
  CHECK(table.columns.front() == "t");
  CHECK(table.columns.back() == "linear_deviation");
  for (std::size_t c = 1; c < table.columns.size(); ++c)
    for (const auto& row : table.rows) CHECK_THAT(row[c], WithinAbs(table.rows[0][c], 1e-12));

  // linear case: deviation column bounded by the integrator tolerance
  const DensityMatrix mixed = random_density(3, 3, 32);
  const HermitianMatrix hh = unit_hermitian(3, 33);
  const Trajectory lin = evolve(
      mixed, {linear_observable(hh), casimir_function_preset("c2_half"), 1.0, 1e-2, Method::rk4});
  for (const auto& row : diagnostics_table(lin).rows) CHECK(row.back() <= 1e-8);

  // nonlinear mixed case: eigenvalue columns constant, state deviates from
  // the linear flow
  const Trajectory nonlin = evolve(
      mixed, {linear_observable(hh), renyi_a(3.0), 4.0, 1e-2, Method::isospectral});
  const DiagnosticsTable nt = diagnostics_table(nonlin);
  for (const auto& row : nt.rows) {
    CHECK_THAT(row[5], WithinAbs(nt.rows[0][5], 1e-10));
    CHECK_THAT(row[6], WithinAbs(nt.rows[0][6], 1e-10));
    CHECK_THAT(row[7], WithinAbs(nt.rows[0][7], 1e-10));
  }
  CHECK(nt.rows.back().back() > 1e-3);  // genuinely nonlinear flow
}

TEST_CASE("evolve validates the grid") {
  const DensityMatrix rho0 = random_density(2, 2, 34);
  const Functional h = linear_observable(random_hermitian(2, 35));
  CHECK_THROWS_AS(evolve(rho0, {h, renyi_a(2.0), 1.0, 0.0, Method::rk4}),
                  std::invalid_argument);
  CHECK_THROWS_AS(evolve(rho0, {h, renyi_a(2.0), -1.0, 0.1, Method::rk4}),
                  std::invalid_argument);
}
