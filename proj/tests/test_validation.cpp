#include "triflow/validation.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace triflow;

TEST_CASE("weak constant: worked instance and boundaries") {
  const auto rep = validate_weak_constant(0.5, 2.0, 3.0, 1.0);
  CHECK(rep.pass());
  CHECK(rep.find("q2_lower")->margin == Catch::Approx(1.0));
  CHECK(rep.find("q0_upper")->rhs == Catch::Approx(2.0 / 3.0));

  // q2 = sqrt(2 q1) sits on the strict boundary and fails exactly that check
  const auto boundary = validate_weak_constant(0.5, 2.0, 2.0, 1.0);
  CHECK_FALSE(boundary.pass());
  CHECK_FALSE(boundary.find("q2_lower")->pass);
  CHECK(boundary.find("q0_upper")->pass);

  const auto q0_fail = validate_weak_constant(0.7, 2.0, 3.0, 1.0);
  CHECK_FALSE(q0_fail.pass());
  CHECK(q0_fail.find("q2_lower")->pass);
  CHECK_FALSE(q0_fail.find("q0_upper")->pass);

  CHECK_THROWS_AS(validate_weak_constant(-0.5, 2.0, 3.0, 1.0), Error);
}

TEST_CASE("weak constant: shrinking q0 never flips a pass") {
  Rng rng(31);
  for (int k = 0; k < 200; ++k) {
    const double q1 = rng.uniform(0.1, 5.0);
    const double q2 = std::sqrt(2.0 * q1) + rng.uniform(0.01, 3.0);
    const double omega = rng.uniform(0.2, 2.0);
    const double q0 = rng.uniform(0.0, 1.0) * omega * q1 * q1 / (2.0 * q2);
    if (q0 <= 0) continue;
    if (!validate_weak_constant(q0, q1, q2, omega).pass()) continue;
    const double smaller = q0 * rng.uniform(0.05, 0.95);
    CHECK(validate_weak_constant(smaller, q1, q2, omega).pass());
  }
}

TEST_CASE("weak exp family: constant-limit instance, hand-evaluated bounds") {
  // p_j = 0, tau_j -> 0 limit of {q0 = 0.5, q1 = 2, q2 = 3, omega = 1}
  ExpSchedule s;
  s.q0 = 0.5; s.q1 = 2.0; s.q2 = 3.0;
  s.r0 = s.r1 = s.r2 = 1.0;
  s.tau1 = 1e-8; s.tau2 = 1e-8;
  s.m1 = s.m2 = 1.0;
  const auto rep = validate_weak_exp_family(s, 1.0);
  CHECK(rep.pass());
  // q2 bound: max{2/sqrt(2), sqrt(4)} = 2
  CHECK(rep.find("q2_lower")->rhs == Catch::Approx(2.0));
  // p0 bound: 3 sqrt(2)/2 - 1
  CHECK(rep.find("p0_upper")->rhs == Catch::Approx(3.0 * std::sqrt(2.0) / 2.0 - 1.0));
  // omega/q0 = 2 against max{2*3/4, 1/6, (3 + 2/sqrt(2))/14} = 1.5
  CHECK(rep.find("omega_over_q0_lower")->lhs == Catch::Approx(2.0));
  CHECK(rep.find("omega_over_q0_lower")->rhs == Catch::Approx(1.5));
  CHECK(rep.derived.at("omega_over_q0_binding") == 1.0);
  // tau1 bound: sqrt(2 * (8 - 6)) = 2
  CHECK(rep.find("tau1_upper")->rhs == Catch::Approx(2.0));
  // tau product bound: 2 * min{11, 1e-8 sqrt(5)} = 2e-8 sqrt(5)
  CHECK(rep.find("tau_product_upper")->rhs ==
        Catch::Approx(2e-8 * std::sqrt(5.0)).epsilon(1e-12));
  // tau product gate: (2/5.5) * (14*4 - 12 + 0.5) = 178/11
  CHECK(rep.find("tau_product_gate")->rhs == Catch::Approx(178.0 / 11.0));
  // closed-form deltas for this instance
  CHECK(rep.derived.at("delta4") == Catch::Approx(4.0));
  CHECK(rep.derived.at("delta5") == Catch::Approx(6.0));
  CHECK(rep.derived.at("c1") == Catch::Approx(2.0));

  // tau1 = 0 keeps its own bound passing with margin equal to the bound
  ExpSchedule z = s;
  z.tau1 = 0.0; z.tau2 = 0.0;
  const auto rep0 = validate_weak_exp_family(z, 1.0);
  CHECK(rep0.find("tau1_upper")->pass);
  CHECK(rep0.find("tau1_upper")->margin == Catch::Approx(2.0));

  // boundary: q2 equal to (p1+q1)/sqrt(q1) fails the first condition
  ExpSchedule b = s;
  b.p1 = 1.0;
  b.q2 = (b.p1 + b.q1) / std::sqrt(b.q1);
  CHECK_FALSE(validate_weak_exp_family(b, 1.0).find("q2_lower")->pass);
}

TEST_CASE("assumption grid check: worked constant instance") {
  // Constant {q0 = 0.5, q1 = 2, q2 = 3}, D = omega_u = 1, lambda = 0:
  // delta1 = 2, delta2 = 10, delta3 = 11, delta4 = 4, delta5 = 6, delta6 = 2,
  // gate 1/2 < 6 - 16/11.
  const ConstantSchedule s{0.5, 2.0, 3.0};
  const auto rep = validate_assumption_main(Schedule(s), ConstantDamping{1.0}, 1.0);
  CHECK(rep.pass());
  CHECK(rep.derived.at("delta1") == Catch::Approx(2.0));
  CHECK(rep.derived.at("delta2") == Catch::Approx(10.0));
  CHECK(rep.derived.at("delta3") == Catch::Approx(11.0));
  CHECK(rep.derived.at("delta4") == Catch::Approx(4.0));
  CHECK(rep.derived.at("delta5") == Catch::Approx(6.0));
  CHECK(rep.derived.at("delta6") == Catch::Approx(2.0));
  CHECK(rep.find("rate_gate")->lhs == Catch::Approx(0.5));
  CHECK(rep.find("rate_gate")->rhs == Catch::Approx(6.0 - 16.0 / 11.0));

  // D = 2 omega_u violates the sup condition
  const auto bad = validate_assumption_main(Schedule(s), ConstantDamping{2.0}, 1.0);
  CHECK_FALSE(bad.find("damping_sup")->pass);

  // large lambda product violates D^2 >= b0^2 l1 l2 / (b1 b2)
  ConstantSchedule lam = s;
  lam.lambda1 = 10.0;
  lam.lambda2 = 10.0;
  const auto bad2 = validate_assumption_main(Schedule(lam), ConstantDamping{1.0}, 1.0);
  CHECK_FALSE(bad2.find("damping_dominates_lambda")->pass);
}

TEST_CASE("assumption grid check: exp family instance passes") {
  ExpSchedule s;
  s.p0 = 0.1; s.p1 = 0.2; s.p2 = 0.2;
  s.q0 = 0.4; s.q1 = 2.0; s.q2 = 3.0;
  s.r0 = 1.0; s.r1 = 1.0; s.r2 = 1.0;
  s.tau1 = 0.05; s.tau2 = 0.05;
  s.m1 = 1.0; s.m2 = 1.0;
  const auto rep = validate_assumption_main(Schedule(s), ConstantDamping{1.0}, 1.0);
  CHECK(rep.pass());
}

TEST_CASE("exponential rate: canonical instance") {
  // rho = L = 1 (kappa = 1), beta = (185, 120, 17), lambda = 0
  const auto rep = validate_exp_rate(185.0, 120.0, 17.0, 0.0, 0.0, 1.0, 1.0);
  CHECK(rep.pass());
  CHECK(rep.find("beta2_lower")->rhs == Catch::Approx(16.0));
  CHECK(rep.find("beta1_lower")->rhs == Catch::Approx(112.0));
  CHECK(rep.find("beta1_upper")->rhs == Catch::Approx(127.5));
  CHECK(rep.find("beta0_lower")->rhs == Catch::Approx(180.0));
  CHECK(rep.find("beta0_upper")->rhs == Catch::Approx(60.0 * 90.0 / 28.0));
  CHECK(rep.derived.at("kappa") == Catch::Approx(1.0));
  CHECK(rep.derived.at("u12") == Catch::Approx(120.0 / 370.0));
  CHECK(rep.derived.at("u11") == Catch::Approx(2040.0 / 370.0 - 3.0));
  CHECK(rep.derived.at("u10") == Catch::Approx(14400.0 / 370.0 - 34.0));
  CHECK(rep.derived.at("u21") == Catch::Approx(17.0 / 370.0));
  CHECK(rep.derived.at("u20") == Catch::Approx(49.0 / 370.0));

  // lambda checks are trivially satisfied at lambda = 0
  for (const char* name : {"lambda1_upper", "lambda_mix_1", "lambda2_upper", "lambda_mix_2",
                           "lambda_mix_3"})
    CHECK(rep.find(name)->pass);

  // beta2 = 6 with rho kappa = 1 fails the first condition
  const auto bad = validate_exp_rate(185.0, 120.0, 6.0, 0.0, 0.0, 1.0, 1.0);
  CHECK_FALSE(bad.find("beta2_lower")->pass);

  CHECK_THROWS_AS(validate_exp_rate(185.0, 120.0, 17.0, 0.0, 0.0, -1.0, 1.0), Error);
}

TEST_CASE("optimization case 1: forced coefficients, window and roots") {
  const auto rep = validate_opt_case1(4.0, 1.0, 1.0, true);
  CHECK(rep.pass());
  CHECK(rep.derived.at("nu1") == Catch::Approx(5.0));
  CHECK(rep.derived.at("nu2") == Catch::Approx(6.0));
  // roots of z^2 - 3z + 1: (3 +- sqrt(5))/2
  CHECK(rep.derived.at("root_p") == Catch::Approx((3.0 - std::sqrt(5.0)) / 2.0));
  CHECK(rep.derived.at("root_q") == Catch::Approx((3.0 + std::sqrt(5.0)) / 2.0));
  CHECK(rep.find("roots_positive")->pass);
  CHECK(rep.find("roots_below_3")->pass);

  // boundary: xi1 = 3 = xi2 + 2 sqrt(xi2) fails the lower window edge
  const auto low = validate_opt_case1(3.0, 1.0, 1.0, true);
  CHECK_FALSE(low.find("xi1_lower")->pass);
  CHECK(low.find("xi2_upper")->pass);

  const auto nine = validate_opt_case1(13.0, 9.0, 1.0, true);
  CHECK_FALSE(nine.find("xi2_upper")->pass);

  // without the trajectory-rate request only the forced coefficients emerge
  const auto forced_only = validate_opt_case1(4.0, 1.0, 1.0, false);
  CHECK(forced_only.checks.empty());
  CHECK(forced_only.pass());

  CHECK_THROWS_AS(validate_opt_case1(4.0, 0.0, 1.0, true), Error);
}

TEST_CASE("optimization case 1: root identities across the feasible window") {
  Rng rng(17);
  for (int k = 0; k < 500; ++k) {
    const double xi2 = rng.uniform(0.01, 8.99);
    const double lo = xi2 + 2.0 * std::sqrt(xi2), hi = (4.0 * xi2 + 9.0) / 3.0;
    if (lo >= hi) continue;
    const double xi1 = lo + (hi - lo) * rng.uniform(0.001, 0.999);
    const auto rep = validate_opt_case1(xi1, xi2, 1.0, true);
    if (!rep.pass()) continue;
    const double p = rep.derived.at("root_p"), q = rep.derived.at("root_q");
    CHECK(std::abs(p + q - (xi1 - xi2)) <= 1e-12 * (1.0 + std::abs(xi1 - xi2)));
    CHECK(std::abs(p * q - xi2) <= 1e-12 * (1.0 + xi2));
    CHECK(p > 0.0);
    CHECK(q < 3.0);
  }
}

TEST_CASE("optimization case 2: forced nu1 and the nu2 bound") {
  // xi1 = 1/4, nu2 = 10 -> nu1 = 5*8 - 20 = 20
  const auto rep = validate_opt_case2(0.25, 10.0, 1.0);
  CHECK(rep.pass());
  CHECK(rep.derived.at("nu1") == 20.0);  // exact in binary arithmetic
  CHECK(rep.derived.at("secondary_exponent") == Catch::Approx(4.0));

  const auto fail9 = validate_opt_case2(0.25, 9.0, 1.0);
  CHECK_FALSE(fail9.pass());

  // non-strict bound admits equality: xi1 = 1, nu2 = 7 = 6 + 1/1
  const auto eq = validate_opt_case2(1.0, 7.0, 1.0);
  CHECK(eq.pass());
  CHECK(eq.derived.at("nu1") == Catch::Approx(8.0));
  CHECK(eq.find("nu2_lower")->margin == Catch::Approx(0.0).margin(1e-15));

  CHECK_THROWS_AS(validate_opt_case2(0.0, 10.0, 1.0), Error);
}

TEST_CASE("ergodic: worked instance with root window") {
  const auto rep = validate_ergodic(1.0, 2.0, 2.0, 1.0);
  CHECK(rep.pass());
  CHECK(rep.derived.at("x1") == Catch::Approx(2.0 - std::sqrt(3.0)).epsilon(1e-12));
  CHECK(rep.derived.at("x2") == Catch::Approx(2.0 + std::sqrt(3.0)).epsilon(1e-12));
  CHECK(rep.find("window_lower")->lhs == Catch::Approx(0.25));
  CHECK(rep.find("window_upper")->rhs == Catch::Approx(4.0));
  CHECK(rep.derived.count("B_lo") == 1);
  CHECK(rep.derived.count("B_hi") == 1);
  CHECK(rep.derived.at("B_lo") < rep.derived.at("B_hi"));

  const auto boundary = validate_ergodic(4.0, 2.0, 2.0, 1.0);
  CHECK_FALSE(boundary.pass());

  // vanishing M makes the bound vacuous
  CHECK(validate_ergodic(1.0, 2.0, 2.0, 1e-12).find("beta0_upper")->pass);
}

TEST_CASE("suggest_parameters: worked sequences") {
  // weak constant with omega = 1, q1 = 2 fixed: q2 midpoint of (2, 4) = 3,
  // then q0 midpoint of (0, 2/3) = 1/3
  const auto wc = suggest_parameters(TheoremId::weak_constant, {{"omega_u", 1.0}, {"q1", 2.0}});
  CHECK(wc.params.at("q2") == Catch::Approx(3.0));
  CHECK(wc.params.at("q0") == Catch::Approx(1.0 / 3.0));
  CHECK(wc.report.pass());

  const auto er = suggest_parameters(TheoremId::exp_rate, {{"rho", 1.0}, {"L_u", 1.0}});
  CHECK(er.report.pass());
  CHECK(er.params.at("beta2") > 16.0);

  // opt case 1 with xi2 = 1: xi1 midpoint of (3, 13/3)
  const auto oc = suggest_parameters(TheoremId::opt_case1, {{"xi2", 1.0}});
  CHECK(oc.params.at("xi1") == Catch::Approx((3.0 + 13.0 / 3.0) / 2.0));
  CHECK(oc.report.pass());
}

TEST_CASE("suggest_parameters round-trip: every suggestion passes its validator") {
  for (std::uint64_t seed : {0ULL, 1ULL, 2ULL}) {
    CHECK(suggest_parameters(TheoremId::weak_constant, {}, seed).report.pass());
    CHECK(suggest_parameters(TheoremId::weak_exp_family, {{"p1", 0.5}}, seed).report.pass());
    CHECK(suggest_parameters(TheoremId::exp_rate, {{"rho", 0.8}, {"L_u", 1.2}}, seed)
              .report.pass());
    CHECK(suggest_parameters(TheoremId::opt_case1, {}, seed).report.pass());
    CHECK(suggest_parameters(TheoremId::opt_case2, {{"xi1", 0.25}}, seed).report.pass());
    CHECK(suggest_parameters(TheoremId::ergodic, {{"M", 2.0}}, seed).report.pass());
  }
  // positive margins everywhere
  const auto sug = suggest_parameters(TheoremId::exp_rate, {});
  for (const auto& c : sug.report.checks) CHECK(c.margin > 0.0);
}

TEST_CASE("suggest_parameters: infeasible fixed constraints are named") {
  // q2 fixed below its lower bound can never pass
  CHECK_THROWS_AS(
      suggest_parameters(TheoremId::weak_constant, {{"q1", 2.0}, {"q2", 1.0}}), Error);
  try {
    suggest_parameters(TheoremId::weak_constant, {{"q1", 2.0}, {"q2", 1.0}});
  } catch (const Error& e) {
    CHECK(e.kind() == Error::Kind::infeasible);
  }
  CHECK_THROWS_AS(suggest_parameters(TheoremId::assumption_main, {}), Error);
}

TEST_CASE("exp rate: moving beta0 toward its window center never flips a pass") {
  const auto rep = validate_exp_rate(185.0, 120.0, 17.0, 0.0, 0.0, 1.0, 1.0);
  REQUIRE(rep.pass());
  const double lo = rep.find("beta0_lower")->rhs;
  const double hi = rep.find("beta0_upper")->rhs;
  const double center = 0.5 * (lo + hi);
  for (double step : {0.1, 0.3, 0.5, 0.9}) {
    const double b0 = 185.0 + step * (center - 185.0);
    CHECK(validate_exp_rate(b0, 120.0, 17.0, 0.0, 0.0, 1.0, 1.0).pass());
  }
}
