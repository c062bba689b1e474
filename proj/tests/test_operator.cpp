#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "latticeq/latticeq.hpp"

using namespace latticeq;

namespace {

Eigen::MatrixXd dense(const SparseHamiltonian& h) {
  const auto n = static_cast<Eigen::Index>(h.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = h.entry(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  return m;
}

}  // namespace

TEST(Assemble, ThreeSiteChain) {
  const auto h = assemble(LatticeBox::at_origin(1, 1), PotentialSpec::zero(1));
  Eigen::MatrixXd want(3, 3);
  want << 0, 1, 0, 1, 0, 1, 0, 1, 0;
  EXPECT_EQ(dense(h), want);
  const auto spec = dense_eig(h);
  for (int j = 1; j <= 3; ++j) EXPECT_NEAR(spec.values(j - 1), 2.0 * std::cos((4 - j) * std::numbers::pi / 4), 1e-14);
  EXPECT_NEAR(spec.values(0), -std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(spec.values(1), 0.0, 1e-14);
}

TEST(Assemble, FreeSpectrumInsideBand) {
  const auto spec = dense_eig(assemble(LatticeBox::at_origin(1, 300), PotentialSpec::zero(1)));
  EXPECT_GE(spec.values.minCoeff(), -2.0);
  EXPECT_LE(spec.values.maxCoeff(), 2.0);
  for (int d = 2; d <= 3; ++d) {
    const auto s = dense_eig(assemble(LatticeBox::at_origin(d, 3), PotentialSpec::zero(d)));
    EXPECT_GE(s.values.minCoeff(), -2.0 * d - 1e-12);
    EXPECT_LE(s.values.maxCoeff(), 2.0 * d + 1e-12);
  }
}

TEST(Assemble, HoppingIsNearestNeighbourInL1) {
  const auto h = assemble(LatticeBox::at_origin(2, 2), PotentialSpec::zero(2));
  const auto& box = h.box();
  std::size_t links = 0;
  h.for_each_link([&](std::size_t i, std::size_t j) {
    EXPECT_EQ(l1_distance(box.site_at(i), box.site_at(j)), 1);
    ++links;
  });
  EXPECT_EQ(links, 2u * 5u * 4u);
  EXPECT_EQ(h.entry(box.index_of({0, 0}), box.index_of({1, 1})), 0.0);
  EXPECT_EQ(h.entry(box.index_of({0, 0}), box.index_of({0, 1})), 1.0);
}

TEST(Assemble, DimensionMismatch) {
  EXPECT_THROW(assemble(LatticeBox::at_origin(2, 1), PotentialSpec::zero(3)), ConfigError);
}

TEST(SpectrumWindow, Examples) {
  const auto w2 = spectrum_window(assemble(LatticeBox::at_origin(2, 3), PotentialSpec::zero(2)));
  EXPECT_EQ(w2.lo, -4.0);
  EXPECT_EQ(w2.hi, 4.0);
  const auto w1 = spectrum_window(assemble(LatticeBox::at_origin(1, 10), PotentialSpec::uniform(10.0, 3, 0, TrimPattern::full_lattice(1))));
  EXPECT_EQ(w1.lo, -7.0);
  EXPECT_EQ(w1.hi, 7.0);
  PotentialTable t{{{0, 0, 0}, 1.5}, {{1, 0, 0}, -0.5}};
  const auto w3 = spectrum_window(assemble(LatticeBox::at_origin(3, 2), PotentialSpec::table(t, TrimPattern::full_lattice(3))));
  EXPECT_EQ(w3.lo, -7.5);
  EXPECT_EQ(w3.hi, 7.5);
}

TEST(SpectrumWindow, ContainsEigenvalues) {
  std::mt19937_64 rng(5);
  for (int c = 0; c < 10; ++c) {
    const auto h = assemble(LatticeBox::at_origin(2, 5), PotentialSpec::uniform(1.0 + c, rng(), c, TrimPattern::periodic({2}, 1)));
    const auto w = spectrum_window(h);
    const auto s = dense_eig(h);
    EXPECT_GE(s.values.minCoeff(), w.lo);
    EXPECT_LE(s.values.maxCoeff(), w.hi);
  }
}

TEST(SamplePotential, Deterministic) {
  const auto pot = PotentialSpec::uniform(3.0, 42, 7, TrimPattern::full_lattice(2));
  const auto a = sample_potential(pot, LatticeBox::at_origin(2, 6));
  const auto b = sample_potential(pot, LatticeBox::at_origin(2, 6));
  EXPECT_EQ(a, b);
  // values do not depend on box size
  const auto big = sample_potential(pot, LatticeBox::at_origin(2, 9));
  for (const auto& [n, v] : a) EXPECT_EQ(big.at(n), v);
  // other realizations differ
  const auto c = sample_potential(PotentialSpec::uniform(3.0, 42, 8, TrimPattern::full_lattice(2)), LatticeBox::at_origin(2, 6));
  EXPECT_NE(a, c);
}

TEST(SamplePotential, ZeroOffGamma) {
  const auto pattern = TrimPattern::periodic({3}, 1);
  const auto pot = PotentialSpec::uniform(5.0, 1, 0, pattern);
  const auto box = LatticeBox::at_origin(2, 6);
  const auto h = assemble(box, pot);
  box.for_each_site([&](std::size_t i, const Site& n) {
    if (!pattern.contains(n)) EXPECT_EQ(h.diagonal()[i], 0.0);
  });
  for (const auto& [n, v] : sample_potential(pot, box)) EXPECT_TRUE(pattern.contains(n));
}

TEST(SamplePotential, UniformMoments) {
  const double W = 2.0;
  const auto pot = PotentialSpec::uniform(W, 99, 0, TrimPattern::full_lattice(1));
  const auto table = sample_potential(pot, LatticeBox::at_origin(1, 50000));
  double mean = 0.0, var = 0.0;
  for (const auto& [n, v] : table) {
    EXPECT_GE(v, -W / 2);
    EXPECT_LT(v, W / 2);
    mean += v;
  }
  mean /= static_cast<double>(table.size());
  for (const auto& [n, v] : table) var += (v - mean) * (v - mean);
  var /= static_cast<double>(table.size() - 1);
  EXPECT_GE(table.size(), 100000u);
  EXPECT_NEAR(mean, 0.0, 0.02);
  EXPECT_NEAR(var, W * W / 12.0, 0.05 * W * W / 12.0);
}

TEST(SamplePotential, CsvRoundTrip) {
  const auto table = sample_potential(PotentialSpec::uniform(4.0, 3, 1, TrimPattern::periodic({2}, 1)), LatticeBox::at_origin(2, 3));
  std::stringstream ss;
  write_potential_csv(ss, table, 2);
  EXPECT_EQ(ss.str().substr(0, 12), "n1,n2,value\n");
  std::stringstream in(ss.str());
  EXPECT_EQ(read_potential_csv(in, 2), table);
  std::stringstream bad("n1,value\n1,x\n");
  EXPECT_THROW(read_potential_csv(bad, 1), ConfigError);
}

TEST(TablePotential, RejectsValuesOffGamma) {
  PotentialTable t{{{1, 0}, 2.0}};
  EXPECT_THROW(PotentialSpec::table(t, TrimPattern::periodic({2}, 1)), ConfigError);
  EXPECT_NO_THROW(PotentialSpec::table({{{2, 0}, 2.0}}, TrimPattern::periodic({2}, 1)));
}

TEST(TablePotential, InfiniteValueRemovesSite) {
  const auto h = assemble(LatticeBox::at_origin(1, 1),
                          PotentialSpec::table({{{-1}, std::numeric_limits<double>::infinity()}}, TrimPattern::untrimmed(1)));
  EXPECT_TRUE(h.has_removed_sites());
  EXPECT_FALSE(h.is_active(0));
  const auto spec = dense_eig(h);
  ASSERT_EQ(spec.values.size(), 2);
  EXPECT_NEAR(spec.values(0), -1.0, 1e-14);
  EXPECT_NEAR(spec.values(1), 1.0, 1e-14);
}

TEST(Hamiltonian, SymmetricMatvec) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g;
  for (int d = 1; d <= 3; ++d) {
    const auto h = assemble(LatticeBox::at_origin(d, 4), PotentialSpec::uniform(3.0, rng(), 0, TrimPattern::full_lattice(d)));
    std::vector<double> u(h.size()), v(h.size()), hu(h.size()), hv(h.size());
    for (auto& x : u) x = g(rng);
    for (auto& x : v) x = g(rng);
    h.apply<double>(u, hu);
    h.apply<double>(v, hv);
    double a = 0.0, b = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
      a += u[i] * hv[i];
      b += hu[i] * v[i];
      scale += std::abs(u[i] * hv[i]);
    }
    EXPECT_NEAR(a, b, 1e-12 * scale);
    EXPECT_TRUE(dense(h).isApprox(dense(h).transpose()));
  }
}

TEST(Hamiltonian, RestrictionConsistency) {
  const auto pot = PotentialSpec::uniform(2.0, 8, 0, TrimPattern::full_lattice(2));
  const auto small = assemble(LatticeBox::at_origin(2, 4), pot);
  const auto big = assemble(LatticeBox::at_origin(2, 9), pot);
  const LatticeBox core = LatticeBox::at_origin(2, 3);
  for (const auto& a : box_sites(core))
    for (const auto& b : box_sites(core))
      EXPECT_EQ(small.entry(small.box().index_of(a), small.box().index_of(b)), big.entry(big.box().index_of(a), big.box().index_of(b)));
}

TEST(Hamiltonian, NormBound) {
  const auto h = assemble(LatticeBox::at_origin(2, 5), PotentialSpec::uniform(6.0, 2, 0, TrimPattern::full_lattice(2)));
  const auto s = dense_eig(h);
  EXPECT_LE(s.values.cwiseAbs().maxCoeff(), 4.0 + h.potential_sup());
}
