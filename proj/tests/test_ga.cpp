#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "bellopt/ga.hpp"
#include "oracles.hpp"

using namespace bellopt;

namespace {

const double kSqrt2 = std::numbers::sqrt2;

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::invalid_input;
}

EprConfiguration chsh_config() {
  const CMatrix z = pauli_z().matrix(), x = pauli_x().matrix();
  return EprConfiguration(
      {HermitianOperator(z), HermitianOperator(x)},
      {HermitianOperator(CMatrix((z + x) / kSqrt2)),
       HermitianOperator(CMatrix((z - x) / kSqrt2))});
}

GaConfig quick(std::uint64_t seed) {
  GaConfig c;
  c.population = 40;
  c.generations = 60;
  c.stall_generations = 30;
  c.polish_iterations = 40;
  c.refine_iterations = 50;
  c.seed_refine_iterations = 5;
  c.restarts = 1;
  c.seed = seed;
  return c;
}

Vector random_genome(Index len, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector g(len);
  for (Index i = 0; i < len; ++i) g(i) = u(rng);
  return g;
}

}  // namespace

TEST_CASE("config validation") {
  GaConfig c;
  CHECK_NOTHROW(c.validate());
  c.population = 1;
  CHECK(code_of([&] { c.validate(); }) == ErrorCode::invalid_input);
  c = {};
  c.elitism = c.population;
  CHECK(code_of([&] { c.validate(); }) == ErrorCode::invalid_input);
  c = {};
  c.crossover_rate = 1.5;
  CHECK(code_of([&] { c.validate(); }) == ErrorCode::invalid_input);
  c = {};
  c.mutation_rate = -0.1;
  CHECK(code_of([&] { c.validate(); }) == ErrorCode::invalid_input);
  c = {};
  c.restarts = 0;
  CHECK(code_of([&] { c.validate(); }) == ErrorCode::invalid_input);
}

TEST_CASE("constraint text form") {
  CHECK(parse_constraint("none").kind == SearchConstraint::Kind::none);
  const SearchConstraint t = parse_constraint("tie:b:3:2");
  CHECK(t.kind == SearchConstraint::Kind::tie);
  CHECK(t.side == Side::bob);
  CHECK(t.target == 2);
  CHECK(t.source == 1);
  CHECK(to_string(t) == "tie:b:3:2");
  CHECK(parse_constraint("commuting:a").side == Side::alice);
  CHECK(parse_constraint("commuting:both").kind == SearchConstraint::Kind::commuting_both);
  CHECK(code_of([] { parse_constraint("tie:c:1:2"); }) == ErrorCode::invalid_input);
  CHECK(code_of([] { SearchConstraint::tie(Side::bob, 3, 1).validate({3, 3, 2, 2}); }) ==
        ErrorCode::invalid_input);
  CHECK(code_of([] { SearchConstraint::tie(Side::bob, 1, 1).validate({3, 3, 2, 2}); }) ==
        ErrorCode::invalid_input);
}

TEST_CASE("genome length and decode") {
  const EprDims d{3, 2, 2, 3};
  CHECK(genome_length(d) == 3 * 4 + 2 * 9);
  CHECK(code_of([&] { decode(Vector::Zero(5), d); }) == ErrorCode::dimension_mismatch);

  const EprConfiguration zero = decode(Vector::Zero(genome_length(d)), d);
  for (const auto& op : zero.alice()) CHECK(op.matrix().isZero(0));
  for (const auto& op : zero.bob()) CHECK(op.matrix().isZero(0));

  // genes of one 2x2 operator: diag(0), diag(1), re(0,1), im(0,1)
  const EprDims d2{2, 2, 2, 2};
  Vector g = Vector::Zero(genome_length(d2));
  g(0) = 1;
  g(1) = -1;
  CHECK((decode(g, d2).alice()[0].matrix() - pauli_z().matrix()).cwiseAbs().maxCoeff() == 0.0);
  g(0) = 2;
  g(1) = -2;
  CHECK((decode(g, d2).alice()[0].matrix() - pauli_z().matrix()).cwiseAbs().maxCoeff() <= 1e-15);
  g(0) = g(1) = 0;
  g(3) = -1;  // im(0,1) = -1 gives sigma_y
  CHECK((decode(g, d2).alice()[0].matrix() - pauli_y().matrix()).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("encode inverts decode on the unit ball") {
  std::mt19937_64 rng(71);
  for (int t = 0; t < 40; ++t) {
    const EprDims d{2 + t % 3, 2 + t % 2, 2 + t % 3, 2 + (t / 3) % 3};
    const Vector g = random_genome(genome_length(d), rng);
    const EprConfiguration cfg = decode(g, d);
    for (const auto& op : cfg.alice()) CHECK(op.norm() <= 1 + 1e-12);
    const Vector back = encode(cfg);
    CHECK(back.size() == g.size());
    const EprConfiguration again = decode(back, d);
    for (std::size_t j = 0; j < cfg.alice().size(); ++j)
      CHECK((again.alice()[j].matrix() - cfg.alice()[j].matrix()).cwiseAbs().maxCoeff() <= 1e-13);
    for (std::size_t k = 0; k < cfg.bob().size(); ++k)
      CHECK((again.bob()[k].matrix() - cfg.bob()[k].matrix()).cwiseAbs().maxCoeff() <= 1e-13);
  }
}

TEST_CASE("fitness examples") {
  const EprDims d{2, 2, 2, 2};
  const WeightMatrix w0 = chsh_weight();
  CHECK(fitness(encode(chsh_config()), w0, d) == doctest::Approx(2 * kSqrt2).epsilon(1e-12));
  CHECK(fitness(Vector::Zero(genome_length(d)), w0, d) == 0.0);
  std::mt19937_64 rng(73);
  for (int t = 0; t < 200; ++t) {
    const Vector g = random_genome(genome_length(d), rng);
    const double f = fitness(g, w0, d);
    CHECK(f <= 2 * kSqrt2 + 1e-9);
    CHECK(f == fitness(g, w0, d));
    const EprConfiguration cfg = decode(g, d);
    std::vector<CMatrix> a, b;
    for (const auto& op : cfg.alice()) a.push_back(op.matrix());
    for (const auto& op : cfg.bob()) b.push_back(op.matrix());
    CHECK(f == doctest::Approx(oracle::hermitian_norm_power(oracle::bell_operator(w0.matrix(), a, b)))
                   .epsilon(1e-9));
  }
}

TEST_CASE("constraints") {
  const EprDims d{3, 3, 2, 2};
  std::mt19937_64 rng(79);
  for (int t = 0; t < 30; ++t) {
    const EprConfiguration cfg = decode(random_genome(genome_length(d), rng), d);
    const EprConfiguration same = apply_constraint(cfg, SearchConstraint::none());
    for (std::size_t j = 0; j < 3; ++j)
      CHECK(same.alice()[j].matrix() == cfg.alice()[j].matrix());

    const EprConfiguration tied = apply_constraint(cfg, SearchConstraint::tie(Side::bob, 2, 1));
    const CMatrix& b2 = tied.bob()[1].matrix();
    const CMatrix& b3 = tied.bob()[2].matrix();
    CHECK(spectral_norm(CMatrix(b2 * b3 - b3 * b2)) <= 1e-10);
    CHECK(tied.bob()[2].norm() <= 1 + 1e-12);

    const EprConfiguration loc = apply_constraint(cfg, SearchConstraint::commuting_both());
    const LocalityReport r = quantum_locality_check(loc);
    CHECK(r.alice_commuting);
    CHECK(r.bob_commuting);

    const EprConfiguration one = apply_constraint(cfg, SearchConstraint::commuting(Side::alice));
    CHECK(quantum_locality_check(one).alice_commuting);
  }
}

TEST_CASE("see-saw refinement never lowers the norm") {
  std::mt19937_64 rng(83);
  const WeightMatrix x3 = canonical_z0(3).weight();
  const EprDims d{3, 3, 2, 2};
  for (int t = 0; t < 10; ++t) {
    const EprConfiguration cfg = decode(random_genome(genome_length(d), rng), d);
    const double before = bell_operator_norm(assemble_bell_operator(x3, cfg));
    const EprConfiguration r = seesaw_refine(x3, cfg, 50);
    const double after = bell_operator_norm(assemble_bell_operator(x3, r));
    CHECK(after >= before - 1e-12);
    CHECK(after <= 3 * std::sqrt(3.0) + 1e-9);
  }
}

TEST_CASE("kernel trim keeps an optimal configuration optimal") {
  const EprConfiguration t = trim_kernels(chsh_weight(), chsh_config());
  CHECK(bell_operator_norm(assemble_bell_operator(chsh_weight(), t)) ==
        doctest::Approx(2 * kSqrt2).epsilon(1e-12));
  for (const auto& op : t.alice())
    CHECK((op.matrix() * op.matrix() - CMatrix::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK(code_of([] { trim_kernels(canonical_z0(3).weight(), chsh_config()); }) ==
        ErrorCode::dimension_mismatch);
}

TEST_CASE("evolve on CHSH") {
  const SearchResult r = evolve(chsh_weight(), {2, 2, 2, 2}, quick(1));
  CHECK(r.best_fitness == doctest::Approx(2 * kSqrt2).epsilon(1e-6));
  CHECK(r.best_fitness ==
        doctest::Approx(bell_operator_norm(assemble_bell_operator(chsh_weight(), r.best_config)))
            .epsilon(1e-12));
  CHECK(r.analysis.thm1_deviation >= -1e-9);
  CHECK(r.generations_run >= 1);
  CHECK(r.fitness_trace.size() >= std::size_t(r.generations_run));
}

TEST_CASE("evolve: monotone trace, ceiling, determinism") {
  std::mt19937_64 rng(89);
  const WeightMatrix w(oracle::random_matrix(3, 2, rng));
  const EprDims d{3, 2, 2, 2};
  GaConfig c = quick(5);
  c.seed_refine_iterations = 0;
  c.refine_iterations = 0;
  c.polish = false;
  c.restarts = 2;
  const SearchResult a = evolve(w, d, c);
  for (std::size_t i = 1; i < a.fitness_trace.size(); ++i)
    CHECK(a.fitness_trace[i] >= a.fitness_trace[i - 1]);
  CHECK(a.best_fitness <= w.dim_scale() * w.op_norm() + 1e-9);

  const SearchResult b = evolve(w, d, c, {}, 3);
  CHECK(a.fitness_trace == b.fitness_trace);
  CHECK(a.best_fitness == b.best_fitness);
  CHECK(encode(a.best_config) == encode(b.best_config));

  c.seed = 6;
  const SearchResult other = evolve(w, d, c);
  CHECK(other.fitness_trace != a.fitness_trace);
}

TEST_CASE("evolve is deterministic with refinement and constraints") {
  const WeightMatrix x3 = canonical_z0(3).weight();
  const EprDims d{3, 3, 2, 2};
  const GaConfig c = quick(8);
  for (const SearchConstraint& k :
       {SearchConstraint::none(), SearchConstraint::tie(Side::bob, 2, 1),
        SearchConstraint::commuting_both()}) {
    const SearchResult a = evolve(x3, d, c, k, 1);
    const SearchResult b = evolve(x3, d, c, k, 2);
    CHECK(a.best_fitness == b.best_fitness);
    CHECK(a.fitness_trace == b.fitness_trace);
    CHECK(a.best_fitness <= 3 * std::sqrt(3.0) + 1e-9);
  }
}

TEST_CASE("commuting searches stay classical") {
  const WeightMatrix x3 = canonical_z0(3).weight();
  const SearchResult r = evolve(x3, {3, 3, 2, 2}, quick(2), SearchConstraint::commuting_both());
  CHECK(r.best_fitness <= 4 + 1e-6);
  const LocalityReport loc = quantum_locality_check(r.best_config);
  CHECK(loc.alice_commuting);
  CHECK(loc.bob_commuting);
}

TEST_CASE("evolve: resource limit and shape errors") {
  CHECK(code_of([] { evolve(chsh_weight(), {2, 2, 9, 8}, quick(0)); }) ==
        ErrorCode::resource_limit);
  CHECK(code_of([] { evolve(chsh_weight(), {3, 2, 2, 2}, quick(0)); }) ==
        ErrorCode::dimension_mismatch);
}

TEST_CASE("local unitaries leave the found norm unchanged") {
  const SearchResult r = evolve(canonical_z0(3).weight(), {3, 3, 2, 2}, quick(4));
  std::mt19937_64 rng(97);
  const CMatrix ua = oracle::random_unitary(2, rng), ub = oracle::random_unitary(2, rng);
  std::vector<HermitianOperator> a, b;
  for (const auto& op : r.best_config.alice())
    a.emplace_back(CMatrix(ua * op.matrix() * ua.adjoint()));
  for (const auto& op : r.best_config.bob())
    b.emplace_back(CMatrix(ub * op.matrix() * ub.adjoint()));
  CHECK(bell_operator_norm(assemble_bell_operator(canonical_z0(3).weight(),
                                                  EprConfiguration(a, b))) ==
        doctest::Approx(r.best_fitness).epsilon(1e-9));
}
