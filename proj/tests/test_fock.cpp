// Copyright 2026 The mechcat Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "mechcat/fock.hpp"

using namespace mechcat;
using namespace mechcat::fock;

namespace {

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

// e^{-|g|^2/2} g^n / sqrt(n!), via logs so large n stays finite.
cplx coherent_closed_form(cplx g, int n) {
  if (n == 0) return std::exp(-0.5 * std::norm(g));
  const double logmag = -0.5 * std::norm(g) + n * std::log(std::abs(g)) - 0.5 * std::lgamma(n + 1.0);
  return std::polar(std::exp(logmag), n * std::arg(g));
}

struct WarningLog {
  std::vector<std::string> messages;
  ScopedWarningSink sink{[this](const std::string& m) { messages.push_back(m); }};
};

}  // namespace

TEST(HilbertSpace, TotalDimIsProduct) {
  HilbertSpace s({4, 40});
  EXPECT_EQ(s.total_dim(), 160);
  EXPECT_EQ(s.num_modes(), 2);
  EXPECT_EQ(s.to_string(), "[4x40]");
  EXPECT_THROW(HilbertSpace({3, 0}), DimensionError);
  EXPECT_THROW(HilbertSpace(std::vector<int>{}), DimensionError);
}

TEST(Annihilation, Dim2HasSingleEntry) {
  const Matrix b = annihilation(2).matrix();
  Matrix expected = Matrix::Zero(2, 2);
  expected(0, 1) = 1.0;
  EXPECT_EQ(b, expected);
}

TEST(Annihilation, EntriesAreSqrtN) {
  const Matrix b = annihilation(7).matrix();
  for (int i = 0; i < 7; ++i) {
    for (int j = 0; j < 7; ++j) {
      const double want = (j == i + 1) ? std::sqrt(static_cast<double>(j)) : 0.0;
      EXPECT_EQ(b(i, j), cplx(want)) << i << "," << j;
    }
  }
}

TEST(Annihilation, KillsVacuum) {
  const Vector out = annihilation(5).apply(fock_ket(0, 5).amplitudes());
  EXPECT_EQ(out.norm(), 0.0);
}

TEST(Annihilation, RejectsSmallDim) {
  EXPECT_THROW(annihilation(1), DimensionError);
  EXPECT_THROW(annihilation(0), DimensionError);
}

TEST(Number, DiagonalCountsQuanta) {
  const Matrix n = (creation(6) * annihilation(6)).matrix();
  for (int k = 0; k < 6; ++k) EXPECT_NEAR(n(k, k).real(), k, 1e-15);
  EXPECT_LT(max_abs(n - number(6).matrix()), 1e-14);
}

TEST(Annihilation, CommutatorIsIdentityBelowTopLevel) {
  const int d = 9;
  const Matrix b = annihilation(d).matrix();
  const Matrix c = b * b.adjoint() - b.adjoint() * b;
  // Entries are sqrt(n)^2 differences, so equality holds up to rounding of sqrt.
  EXPECT_LT(max_abs(c.topLeftCorner(d - 1, d - 1) - Matrix::Identity(d - 1, d - 1)), 4 * d * 1e-16);
  EXPECT_NEAR(c(d - 1, d - 1).real(), -(d - 1.0), 1e-13);
}

TEST(Parity, Dim3) {
  const Matrix p = parity(3).matrix();
  Matrix expected = Matrix::Zero(3, 3);
  expected.diagonal() << 1.0, -1.0, 1.0;
  EXPECT_EQ(p, expected);
  EXPECT_EQ(expect(DensityMatrix(fock_ket(0, 3)), parity(3)), cplx(1.0));
}

TEST(Parity, AnticommutesWithAnnihilation) {
  for (int d : {2, 5, 12}) {
    const Matrix b = annihilation(d).matrix();
    const Matrix p = parity(d).matrix();
    EXPECT_EQ(max_abs(p * b + b * p), 0.0) << d;
  }
}

TEST(Parity, EvenCatIsPlusOneEigenstate) {
  for (cplx beta : {cplx(0.5, 0.0), cplx(2.36, 0.0), cplx(1.0, -1.7)}) {
    const Ket cat = cat_even(beta, 40);
    EXPECT_NEAR(expect(cat, parity(40)).real(), 1.0, 1e-14);
  }
}

TEST(Displacement, ZeroIsIdentity) {
  EXPECT_LT(max_abs(displacement(0.0, 10).matrix() - Matrix::Identity(10, 10)), 1e-15);
}

TEST(Displacement, VacuumGivesClosedFormCoherentState) {
  const int dim = 40;
  for (cplx g : {cplx(1.0, 0.5), cplx(-2.0, 1.0), cplx(0.0, 3.0)}) {
    ASSERT_LE(std::norm(g), dim / 4.0);
    const Vector v = displacement(g, dim).apply(fock_ket(0, dim).amplitudes());
    // Compare on levels well below the edge, where the truncated exponential is exact to 1e-8.
    for (int n = 0; n < dim / 2; ++n) EXPECT_NEAR(std::abs(v(n) - coherent_closed_form(g, n)), 0.0, 1e-8) << n;
  }
}

TEST(Displacement, InverseWithinTruncation) {
  const int dim = 40;
  const cplx a(2.0, -1.5);
  ASSERT_LE(std::norm(a), dim / 4.0);
  const Matrix prod = displacement(a, dim).matrix() * displacement(-a, dim).matrix();
  EXPECT_LT(max_abs(prod - Matrix::Identity(dim, dim)), 1e-8);
}

TEST(Displacement, WarnsNearTruncationEdge) {
  WarningLog log;
  displacement(cplx(4.0, 0.0), 10);
  ASSERT_EQ(log.messages.size(), 1u);
  EXPECT_NE(log.messages[0].find("truncation"), std::string::npos);
}

TEST(Squeeze, ZeroIsIdentity) {
  EXPECT_LT(max_abs(squeeze(0.0, 10).matrix() - Matrix::Identity(10, 10)), 1e-15);
}

TEST(Squeeze, BogoliubovTransformOnLowLevels) {
  // S^+ b S = b cosh r + e^{i theta} sinh r b^+ for s = r e^{i theta}.
  const int dim = 100;
  const cplx s = std::polar(0.3, 0.7);
  const Matrix S = squeeze(s, dim).matrix();
  const Matrix b = annihilation(dim).matrix();
  const Matrix lhs = S.adjoint() * b * S;
  const Matrix rhs = std::cosh(0.3) * b + std::polar(std::sinh(0.3), 0.7) * b.adjoint();
  EXPECT_LT(max_abs((lhs - rhs).topLeftCorner(20, 20)), 1e-10);
}

TEST(Coherent, MatchesClosedForm) {
  const cplx g(1.3, -0.4);
  const Ket k = coherent(g, 30);
  for (int n = 0; n < 30; ++n) EXPECT_NEAR(std::abs(k.amplitudes()(n) - coherent_closed_form(g, n)), 0.0, 1e-12);
  EXPECT_NEAR(k.amplitudes().norm(), 1.0, 1e-12);
}

TEST(Coherent, WarnsWhenSupportExceedsDim) {
  WarningLog log;
  coherent(cplx(3.0, 0.0), 12);
  EXPECT_EQ(log.messages.size(), 1u);
}

TEST(CatEven, ZeroAmplitudeIsVacuum) {
  const Ket k = cat_even(0.0, 8);
  EXPECT_EQ(k.amplitudes(), fock_ket(0, 8).amplitudes());
}

TEST(CatEven, OddLevelsAreBitwiseZero) {
  const Ket k = cat_even(cplx(2.36, 0.3), 40);
  for (int n = 1; n < 40; n += 2) {
    EXPECT_EQ(k.amplitudes()(n).real(), 0.0);
    EXPECT_EQ(k.amplitudes()(n).imag(), 0.0);
  }
}

TEST(CatEven, MeanPhononIsTanhFormula) {
  const double b = 2.36;
  const Ket k = cat_even(b, 40);
  const double n = expect(k, number(40)).real();
  EXPECT_NEAR(n, b * b * std::tanh(b * b), 1e-8);
}

TEST(CatEven, NormalizationConstant) {
  // <beta|psi> = (1 + e^{-2|b|^2}) / N with N = sqrt(2 (1 + e^{-2|b|^2})).
  const cplx beta(1.1, 0.2);
  const double e = std::exp(-2.0 * std::norm(beta));
  const cplx overlap = coherent(beta, 40).inner(cat_even(beta, 40));
  EXPECT_NEAR(std::abs(overlap), (1.0 + e) / std::sqrt(2.0 * (1.0 + e)), 1e-12);
}

TEST(CatEven, IsZeroEigenvectorOfJump) {
  const int dim = 40;
  const cplx beta(2.36, 0.0);
  const Matrix b = annihilation(dim).matrix();
  const Matrix c = b * b - beta * beta * Matrix::Identity(dim, dim);
  const Vector r = c * cat_even(beta, dim).amplitudes();
  // The residual lives on the top two levels, where the truncation cuts b^2.
  EXPECT_LT(r.norm(), 1e-8);
}

TEST(CatOdd, EvenLevelsAreZero) {
  const Ket k = cat_odd(cplx(1.5, 0.0), 30);
  for (int n = 0; n < 30; n += 2) EXPECT_EQ(k.amplitudes()(n), cplx(0.0));
  EXPECT_NEAR(expect(k, parity(30)).real(), -1.0, 1e-14);
  EXPECT_THROW(cat_odd(0.0, 10), InvalidStateError);
}

TEST(Ket, NormalizesInput) {
  Vector v(3);
  v << 3.0, 0.0, cplx(0.0, 4.0);
  const Ket k(HilbertSpace::single(3), v);
  EXPECT_NEAR(k.amplitudes().norm(), 1.0, 1e-12);
  EXPECT_THROW(Ket(HilbertSpace::single(3), Vector::Zero(3)), InvalidStateError);
  EXPECT_THROW(Ket(HilbertSpace::single(4), v), DimensionError);
}

TEST(DensityMatrix, RejectsInvalidMatrices) {
  const auto s = HilbertSpace::single(2);
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 0.5;
  EXPECT_THROW(DensityMatrix(s, m), InvalidStateError);  // trace
  m(1, 1) = 0.5;
  m(0, 1) = cplx(0.0, 0.1);
  EXPECT_THROW(DensityMatrix(s, m), InvalidStateError);  // hermiticity
  m(1, 0) = cplx(0.0, -0.1);
  EXPECT_NO_THROW(DensityMatrix(s, m));
  Matrix neg = Matrix::Zero(2, 2);
  neg(0, 0) = 1.5;
  neg(1, 1) = -0.5;
  EXPECT_THROW(DensityMatrix(s, neg), InvalidStateError);  // positivity
  EXPECT_NO_THROW(DensityMatrix(s, neg, false));
  EXPECT_THROW(DensityMatrix(HilbertSpace::single(3), m), DimensionError);
}

TEST(DensityMatrix, PurityOfPureAndMixed) {
  EXPECT_NEAR(DensityMatrix(coherent(cplx(1.0, 1.0), 20)).purity(), 1.0, 1e-12);
  Matrix m = Matrix::Identity(4, 4) / 4.0;
  EXPECT_NEAR(DensityMatrix(HilbertSpace::single(4), m).purity(), 0.25, 1e-15);
}

TEST(Tensor, IdentitiesCompose) {
  const Operator i2 = Operator::identity(HilbertSpace::single(2));
  const Operator i3 = Operator::identity(HilbertSpace::single(3));
  const Operator i6 = tensor(i2, i3);
  EXPECT_EQ(i6.space(), HilbertSpace({2, 3}));
  EXPECT_EQ(i6.matrix(), Matrix::Identity(6, 6));
}

TEST(Tensor, KronIndexOrderIsFirstModeSlowest) {
  const Matrix a = annihilation(2).matrix();
  const Matrix k = tensor(annihilation(2), Operator::identity(HilbertSpace::single(3))).matrix();
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      for (int r = 0; r < 3; ++r) EXPECT_EQ(k(3 * i + r, 3 * j + r), a(i, j));
    }
  }
}

TEST(Embed, MatchesTensorWithIdentity) {
  const HilbertSpace s({3, 4});
  const Operator b = embed(annihilation(4), s, 1);
  const Operator ref = tensor(Operator::identity(HilbertSpace::single(3)), annihilation(4));
  EXPECT_EQ(b.matrix(), ref.matrix());
  EXPECT_THROW(embed(annihilation(3), s, 1), DimensionError);
}

TEST(PartialTrace, RecoversProductMarginals) {
  const DensityMatrix ra(coherent(cplx(0.4, 0.1), 4));
  Matrix mb = Matrix::Zero(5, 5);
  mb(0, 0) = 0.6;
  mb(2, 2) = 0.3;
  mb(4, 4) = 0.1;
  mb(0, 2) = 0.2;
  mb(2, 0) = 0.2;
  const DensityMatrix rb(HilbertSpace::single(5), mb);
  const DensityMatrix rab = tensor(ra, rb);
  EXPECT_LT(max_abs(partial_trace(rab, 0).matrix() - ra.matrix()), 1e-12);
  EXPECT_LT(max_abs(partial_trace(rab, 1).matrix() - rb.matrix()), 1e-12);
  EXPECT_NEAR(std::abs(partial_trace(rab, 1).matrix().trace() - 1.0), 0.0, 1e-12);
  EXPECT_THROW(partial_trace(rab, 2), DimensionError);
}

TEST(PartialTrace, EntangledStateGivesMixedMarginal) {
  Vector v = Vector::Zero(4);
  v(0) = 1.0;
  v(3) = 1.0;
  const DensityMatrix bell(Ket(HilbertSpace({2, 2}), v));
  const Matrix r = partial_trace(bell, 0).matrix();
  EXPECT_LT(max_abs(r - 0.5 * Matrix::Identity(2, 2)), 1e-15);
}

TEST(Expect, NumberOnFockOne) {
  EXPECT_EQ(expect(DensityMatrix(fock_ket(1, 4)), number(4)), cplx(1.0));
  EXPECT_THROW(expect(DensityMatrix(fock_ket(1, 4)), number(5)), DimensionError);
}

TEST(Operator, ArithmeticChecksSpaces) {
  const Operator a = annihilation(3);
  const Operator b = annihilation(4);
  EXPECT_THROW(a + b, DimensionError);
  EXPECT_THROW(a * b, DimensionError);
  EXPECT_EQ(dagger(a).matrix(), a.matrix().adjoint());
  EXPECT_EQ(((a + a) - a).matrix(), a.matrix());
  EXPECT_EQ((cplx(2.0) * a).matrix(), 2.0 * a.matrix());
}

TEST(MatrixExponential, AgreesWithEigendecompositionForHermitian) {
  const int d = 6;
  const Matrix r = Matrix::Random(d, d);
  const Matrix h = 0.5 * (r + r.adjoint());
  const Matrix u = matrix_exponential(Operator(HilbertSpace::single(d), kI * h)).matrix();
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  const Vector phases = (kI * es.eigenvalues().cast<cplx>()).array().exp();
  const Matrix ref = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
  EXPECT_LT(max_abs(u - ref), 1e-10);
}
