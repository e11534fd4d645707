#include <doctest.h>

#include <cmath>
#include <sstream>

#include "mcboost/ensemble.hpp"
#include "mcboost/evaluate.hpp"
#include "mcboost/stagewise.hpp"
#include "support.hpp"

using namespace mcboost;
using namespace mcboost::testing;

namespace {

BoostOptions with_dual() {
  BoostOptions o;
  o.record_dual = true;
  return o;
}

std::string dump(const Ensemble& e) {
  std::ostringstream s;
  write_ensemble(s, e);
  return s.str();
}

}  // namespace

TEST_CASE("coefficients") {
  CHECK(boost_coefficient(0.25, 0.5) == doctest::Approx(0.5 * std::log(3.0)).epsilon(1e-15));
  CHECK(boost_coefficient(0.25, 0.5) == doctest::Approx(0.549306).epsilon(1e-6));
  CHECK(boost_coefficient(0.25, 0.25) == doctest::Approx(0.274653).epsilon(1e-6));
  CHECK(boost_coefficient(0.5, 0.5) == 0.0);
  CHECK(boost_coefficient(0.0, 0.5) == doctest::Approx(0.5 * std::log((1 - 1e-10) / 1e-10)));
  CHECK(std::isfinite(boost_coefficient(1.0, 0.25)));
  CHECK(clamp_epsilon(-1.0) == kEpsilonFloor);
}

TEST_CASE("uninformative data is a fixed point") {
  const Dataset d = make_dataset({{1.0}, {1.0}, {1.0}, {1.0}}, {1, 2, 1, 2}, 2);
  const auto run = adaboost_mo(d, one_vs_all(2), LearnerKind::Stump, 3, with_dual());
  for (std::size_t t = 0; t < 3; ++t) {
    CHECK(run.trace.epsilon[t] == 0.5);
    CHECK(run.trace.omega[t] == 0.0);
    for (double u : run.trace.dual->snapshots[t].u) CHECK(u == 0.125);
  }
}

TEST_CASE("separable toy reaches zero training error") {
  const Dataset d = toy_instances()[0];
  const auto mo = adaboost_mo(d, one_vs_all(3), LearnerKind::Stump, 10);
  CHECK(mo.trace.train_error.back() == 0.0);
  CHECK(multiclass_error(mo.ensemble, d) == 0.0);
  const auto ecc = adaboost_ecc(d, ColumnStream(3, 5), LearnerKind::Stump, 10);
  CHECK(ecc.trace.train_error.back() == 0.0);
}

TEST_CASE("straight-line transcriptions agree bit for bit") {
  const auto toys = toy_instances();
  const std::vector<CodingMatrix> codes{one_vs_all(3), exhaustive_ecoc(3), exhaustive_ecoc(4)};
  for (std::size_t k = 0; k < toys.size(); ++k) {
    CAPTURE(k);
    const auto ref = reference_mo(toys[k], codes[k], 20);
    const auto got = adaboost_mo(toys[k], codes[k], LearnerKind::Stump, 20, with_dual());
    CHECK(got.trace.epsilon == ref.epsilon);
    CHECK(got.trace.omega == ref.omega);
    for (std::size_t t = 0; t < 20; ++t) CHECK(got.trace.dual->snapshots[t].u == ref.u[t]);

    const std::uint64_t seed = 100 + k;
    const auto eref = reference_ecc(toys[k], seed, 20);
    const auto egot = adaboost_ecc(toys[k], ColumnStream(toys[k].num_classes(), seed), LearnerKind::Stump, 20, with_dual());
    CHECK(egot.trace.epsilon == eref.epsilon);
    CHECK(egot.trace.omega == eref.omega);
    for (std::size_t t = 0; t < 20; ++t) CHECK(egot.trace.dual->snapshots[t].u == eref.u[t]);
  }
}

TEST_CASE("two-class ECC reweights with exponent 2 omega") {
  Rng rng(3);
  const Dataset d = random_dataset(rng, 20, 2, 2, 3.0);
  const auto run = adaboost_ecc(d, ColumnStream(2, 8), LearnerKind::Stump, 1, with_dual());
  const double omega = run.trace.omega[0];
  const auto& h = run.ensemble.rounds[0][0];
  const int plus_class = run.ensemble.code(0, 0) == 1 ? 1 : 2;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const int target = d.label(i) == plus_class ? 1 : -1;
    const double expect = (1.0 / 20.0) * std::exp(-2.0 * omega * target * predict(h, row_span(d.features(), i)));
    CHECK(run.trace.dual->snapshots[0].u[i] == doctest::Approx(expect).epsilon(1e-14));
  }
}

TEST_CASE("loss descent, positivity and reproducibility") {
  Rng rng(17);
  const Dataset d = random_dataset(rng, 60, 3, 4, 3.0);
  const auto a = adaboost_mo(d, exhaustive_ecoc(4), LearnerKind::Stump, 40, with_dual());
  for (std::size_t t = 1; t < 40; ++t)
    if (a.trace.epsilon[t] < 0.5) CHECK(a.trace.loss[t] <= a.trace.loss[t - 1] * (1.0 + 1e-12));
  for (const auto& s : a.trace.dual->snapshots)
    for (double u : s.u) CHECK(u > 0.0);
  CHECK(dump(a.ensemble) == dump(adaboost_mo(d, exhaustive_ecoc(4), LearnerKind::Stump, 40).ensemble));

  const auto e = adaboost_ecc(d, ColumnStream(4, 2), LearnerKind::Lda, 30, with_dual());
  for (const auto& s : e.trace.dual->snapshots)
    for (double u : s.u) CHECK(u > 0.0);
  CHECK(dump(e.ensemble) == dump(adaboost_ecc(d, ColumnStream(4, 2), LearnerKind::Lda, 30).ensemble));
}

TEST_CASE("long runs survive weight underflow") {
  const Dataset d = toy_instances()[0];
  const auto mo = adaboost_mo(d, one_vs_all(3), LearnerKind::Stump, 300);
  const auto ecc = adaboost_ecc(d, ColumnStream(3, 1), LearnerKind::Stump, 300);
  CHECK(mo.ensemble.size() == 300);
  CHECK(ecc.ensemble.size() == 300);
  CHECK(ecc.trace.train_error.back() == 0.0);
}

TEST_CASE("trace csv") {
  const Dataset d = toy_instances()[0];
  BoostOptions o;
  o.test = &d;
  const auto run = adaboost_mo(d, one_vs_all(3), LearnerKind::Stump, 2, o);
  std::ostringstream s;
  write_trace_csv(s, run.trace);
  const std::string text = s.str();
  CHECK(text.rfind("iteration,train_err,test_err,epsilon,omega\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
  CHECK(run.trace.test_error == run.trace.train_error);
}
