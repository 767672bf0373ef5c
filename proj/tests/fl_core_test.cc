// Copyright 2026 The airfl Authors
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
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include <unistd.h>

#include <gtest/gtest.h>

#include "airfl/dataset.h"
#include "airfl/model.h"
#include "airfl/quadratic.h"

namespace airfl {
namespace {

Dataset BalancedLabels(int per_label, int arity, int dim = 3) {
  Dataset d;
  d.arity = arity;
  d.features = Mat::Zero(per_label * arity, dim);
  for (int i = 0; i < per_label * arity; ++i) {
    d.labels.push_back(i % arity);
    d.features(i, 0) = i;
  }
  return d;
}

TEST(PartitionTest, SingleLabelShardsCoverEachLabelOnce) {
  const Dataset d = BalancedLabels(30, 10);
  const auto parts = PartitionNonIid(d, 10, 1, 7);
  ASSERT_EQ(parts.size(), 10u);
  std::set<int> seen;
  for (int k = 0; k < 10; ++k) {
    ASSERT_EQ(parts[k].size(), 30);
    for (int y : parts[k].labels) EXPECT_EQ(y, k);
    seen.insert(parts[k].labels.front());
  }
  EXPECT_EQ(seen.size(), 10u);
}

TEST(PartitionTest, LabelCensusWithTwoLabelsPerDevice) {
  const Dataset d = BalancedLabels(40, 10);
  const auto rows = PartitionIndices(d, 20, 2, 3);
  std::set<int> used;
  for (int k = 0; k < 20; ++k) {
    std::map<int, int> census;
    for (int r : rows[k]) {
      census[d.labels[r]]++;
      EXPECT_TRUE(used.insert(r).second) << "row assigned twice";
    }
    ASSERT_EQ(census.size(), 2u);
    EXPECT_EQ(census.count((2 * k) % 10), 1u);
    EXPECT_EQ(census.count((2 * k + 1) % 10), 1u);
    for (const auto& [label, count] : census) EXPECT_EQ(count, 10);
  }
}

TEST(PartitionTest, SeededAndDeterministic) {
  const Dataset d = BalancedLabels(20, 4);
  EXPECT_EQ(PartitionIndices(d, 4, 2, 11), PartitionIndices(d, 4, 2, 11));
  EXPECT_NE(PartitionIndices(d, 4, 2, 11), PartitionIndices(d, 4, 2, 12));
}

TEST(PartitionTest, Errors) {
  Dataset empty;
  empty.arity = 10;
  empty.features = Mat::Zero(0, 3);
  EXPECT_THROW(PartitionIndices(empty, 4, 1, 1), SizingError);
  const Dataset d = BalancedLabels(2, 10);
  EXPECT_THROW(PartitionIndices(d, 30, 1, 1), SizingError);
  EXPECT_THROW(PartitionIndices(d, 4, 0, 1), ConfigError);
  EXPECT_THROW(PartitionIndices(d, 4, 11, 1), ConfigError);
}

TEST(PartitionTest, RegressionBlocks) {
  Dataset d;
  d.features = Mat::Zero(23, 2);
  d.targets = Vec::LinSpaced(23, 0, 22);
  const auto rows = PartitionIndices(d, 5, 1, 2);
  std::set<int> used;
  for (const auto& shard : rows) {
    EXPECT_EQ(shard.size(), 4u);
    for (int r : shard) EXPECT_TRUE(used.insert(r).second);
  }
}

TEST(RootSplitTest, DisjointAndBalanced) {
  const Dataset d = BalancedLabels(12, 5);
  auto [root, rest] = SplitRootDataset(d, 3, 9);
  EXPECT_EQ(root.size(), 15);
  EXPECT_EQ(rest.size(), 45);
  std::map<int, int> census;
  for (int y : root.labels) census[y]++;
  for (const auto& [label, count] : census) EXPECT_EQ(count, 3);
  std::set<double> ids;
  for (int i = 0; i < root.size(); ++i) ids.insert(root.features(i, 0));
  for (int i = 0; i < rest.size(); ++i) {
    EXPECT_EQ(ids.count(rest.features(i, 0)), 0u);
  }
  EXPECT_THROW(SplitRootDataset(d, 12, 9), SizingError);
}

TEST(MinibatchTest, DistinctIndicesAndFullFallback) {
  std::mt19937_64 rng(5);
  const Minibatch b = DrawMinibatch(rng, 50, 20);
  EXPECT_EQ(b.batch_size(), 20);
  EXPECT_EQ(std::set<int>(b.indices.begin(), b.indices.end()).size(), 20u);
  for (int i : b.indices) {
    EXPECT_GE(i, 0);
    EXPECT_LT(i, 50);
  }
  EXPECT_EQ(DrawMinibatch(rng, 7, 32).batch_size(), 7);
}

TEST(FlipLabelsTest, MirrorsLabelsAndNegatesTargets) {
  const Dataset d = BalancedLabels(1, 10);
  const Dataset f = FlipLabels(d);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(f.labels[i], 9 - d.labels[i]);
  EXPECT_EQ(FlipLabels(f).labels, d.labels);
  Dataset r;
  r.features = Mat::Zero(2, 1);
  r.targets = Vec::Constant(2, 1.5);
  EXPECT_DOUBLE_EQ(FlipLabels(r).targets[1], -1.5);
}

TEST(ClipTest, HandExamples) {
  Vec g(2);
  g << 3.0, 4.0;
  const Vec c = ClipGradient(g, 1.0);
  EXPECT_NEAR(c[0], 0.6, 1e-15);
  EXPECT_NEAR(c[1], 0.8, 1e-15);
  EXPECT_LE(c.norm(), 1.0);
  EXPECT_EQ(ClipGradient(g, 5.0), g);
  EXPECT_EQ(ClipGradient(g, 10.0), g);
  EXPECT_EQ(ClipGradient(Vec::Zero(3), 1.0), Vec::Zero(3));
  EXPECT_THROW(ClipGradient(g, 0.0), ConfigError);
}

TEST(ClipTest, NeverExceedsBoundOnRandomVectors) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 10.0);
  for (int t = 0; t < 2000; ++t) {
    Vec g = Vec::NullaryExpr(17, [&] { return n(rng); });
    const double bound = 0.1 + (t % 13);
    const Vec c = ClipGradient(g, bound);
    EXPECT_LE(c.norm(), bound);
    if (g.norm() > bound) {
      EXPECT_NEAR(c.norm(), bound, 1e-12 * bound);
      EXPECT_NEAR(c.dot(g) / (c.norm() * g.norm()), 1.0, 1e-12);
    }
  }
}

class GradientCheck : public ::testing::TestWithParam<int> {};

TEST_P(GradientCheck, MatchesFiniteDifferences) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  const int kind = GetParam();
  Dataset d;
  std::shared_ptr<Architecture> arch;
  if (kind == 2) {
    d.features = Mat::NullaryExpr(12, 4, [&] { return n(rng); });
    d.targets = Vec::NullaryExpr(12, [&] { return n(rng); });
    arch = std::make_shared<LeastSquares>(4);
  } else {
    d = MakeGaussianClassification(12, 4, 3, 2.0, 4);
    if (kind == 0) {
      arch = std::make_shared<LinearSoftmax>(4, 3);
    } else {
      arch = std::make_shared<Mlp>(4, 5, 3);
    }
  }
  Vec w = Vec::NullaryExpr(arch->dimension(), [&] { return 0.5 * n(rng); });
  std::vector<int> rows = {0, 2, 3, 5, 7, 11};
  const Vec g = arch->Gradient(w, d, rows);
  const Vec fd = FiniteDifferenceGradient(*arch, w, d, rows, 1e-6);
  EXPECT_LT((g - fd).norm(), 1e-6 * std::max(1.0, g.norm()));
}

INSTANTIATE_TEST_SUITE_P(Architectures, GradientCheck, ::testing::Values(0, 1, 2));

TEST(ModelTest, MlpParameterCount) {
  EXPECT_EQ(Mlp(784, 30, 10).dimension(), 23860);
  EXPECT_EQ(LinearSoftmax(784, 10).dimension(), 7850);
}

TEST(ModelTest, ZeroSoftmaxLossIsLogArity) {
  const Dataset d = MakeGaussianClassification(20, 3, 5, 1.0, 2);
  LinearSoftmax arch(3, 5);
  std::vector<int> rows(20);
  std::iota(rows.begin(), rows.end(), 0);
  EXPECT_NEAR(arch.Loss(Vec::Zero(arch.dimension()), d, rows), std::log(5.0), 1e-12);
  EXPECT_TRUE(std::isnan(LeastSquares(3).Accuracy(Vec::Zero(3), d)));
}

TEST(GlobalLossTest, EqualWeightAverageOfLocalLosses) {
  // Shard one: loss 0.5*(1-0)^2 = 0.5; shard two: mean of 0.5*4 and 0 = 1.
  auto arch = std::make_shared<LeastSquares>(1);
  Model m{arch, Vec::Zero(1)};
  Dataset a;
  a.features = Mat::Ones(1, 1);
  a.targets = Vec::Ones(1);
  Dataset b;
  b.features = Mat::Ones(2, 1);
  b.targets = Vec(2);
  b.targets << 2.0, 0.0;
  std::vector<Dataset> parts = {a, b};
  EXPECT_DOUBLE_EQ(GlobalLoss(m, parts), 0.75);
  // Gradients: -1 and -1 -> mean -1.
  EXPECT_DOUBLE_EQ(GlobalGradient(m, parts)[0], -1.0);
}

void WriteBigEndian(std::ofstream& out, std::uint32_t v) {
  const unsigned char bytes[4] = {static_cast<unsigned char>(v >> 24),
                                  static_cast<unsigned char>(v >> 16),
                                  static_cast<unsigned char>(v >> 8),
                                  static_cast<unsigned char>(v)};
  out.write(reinterpret_cast<const char*>(bytes), 4);
}

class IdxTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("airfl_idx_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::string Path(const std::string& name) const { return (dir_ / name).string(); }
  void WriteImages(const std::string& name, std::uint32_t magic, int count,
                   int pixels_written) {
    std::ofstream out(Path(name), std::ios::binary);
    WriteBigEndian(out, magic);
    WriteBigEndian(out, count);
    WriteBigEndian(out, 2);
    WriteBigEndian(out, 2);
    for (int i = 0; i < pixels_written; ++i) out.put(static_cast<char>(i * 17));
  }
  void WriteLabels(const std::string& name, std::uint32_t magic, int count) {
    std::ofstream out(Path(name), std::ios::binary);
    WriteBigEndian(out, magic);
    WriteBigEndian(out, count);
    for (int i = 0; i < count; ++i) out.put(static_cast<char>(i % 10));
  }
  std::filesystem::path dir_;
};

TEST_F(IdxTest, ParsesAndScales) {
  WriteImages("img", 2051, 3, 12);
  WriteLabels("lab", 2049, 3);
  const Dataset d = LoadIdx(Path("img"), Path("lab"));
  ASSERT_EQ(d.size(), 3);
  EXPECT_EQ(d.feature_dim(), 4);
  EXPECT_EQ(d.arity, 10);
  EXPECT_DOUBLE_EQ(d.features(1, 1), 5 * 17 / 255.0);
  EXPECT_EQ(d.labels[2], 2);
  EXPECT_EQ(LoadIdx(Path("img"), Path("lab"), 2).size(), 2);
}

TEST_F(IdxTest, Errors) {
  WriteImages("img", 2051, 3, 12);
  WriteImages("bad_img", 1234, 3, 12);
  WriteImages("short_img", 2051, 3, 7);
  WriteLabels("lab", 2049, 3);
  WriteLabels("bad_lab", 99, 3);
  WriteLabels("lab2", 2049, 2);
  EXPECT_THROW(LoadIdx(Path("missing"), Path("lab")), ConfigError);
  EXPECT_THROW(LoadIdx(Path("bad_img"), Path("lab")), ConfigError);
  EXPECT_THROW(LoadIdx(Path("img"), Path("bad_lab")), ConfigError);
  EXPECT_THROW(LoadIdx(Path("img"), Path("lab2")), ConfigError);
  EXPECT_THROW(LoadIdx(Path("short_img"), Path("lab")), ConfigError);
}

TEST(QuadraticTaskTest, ConstantsAreExact) {
  QuadraticTaskOptions opt;
  opt.dim = 6;
  opt.devices = 4;
  opt.rows_per_device = 15;
  const QuadraticTask task = MakeQuadraticTask(opt);
  ASSERT_EQ(task.devices.size(), 4u);
  // The gradient vanishes at w_star and f_star is the value there.
  EXPECT_LT(task.GlobalGradientAt(task.w_star).norm(), 1e-9);
  EXPECT_NEAR(task.GlobalValue(task.w_star), task.f_star, 1e-12);
  // Smoothness bounds every local Hessian; mu is the smallest eigenvalue of
  // the average.
  double largest = 0.0;
  for (const auto& d : task.devices) {
    const Mat h = d.features.transpose() * d.features / d.size();
    largest = std::max(largest, Eigen::SelfAdjointEigenSolver<Mat>(h).eigenvalues().maxCoeff());
  }
  EXPECT_NEAR(task.smoothness, largest, 1e-10 * largest);
  const double mu = Eigen::SelfAdjointEigenSolver<Mat>(task.hessian).eigenvalues().minCoeff();
  EXPECT_NEAR(task.pl_constant, mu, 1e-10 * largest);
  EXPECT_GT(mu, 0.0);
  // The architecture's loss agrees with the closed form.
  LeastSquares arch(6);
  Model m{std::make_shared<LeastSquares>(6), Vec::Ones(6)};
  EXPECT_NEAR(GlobalLoss(m, task.devices), task.GlobalValue(Vec::Ones(6)), 1e-10);
  EXPECT_LT((GlobalGradient(m, task.devices) - task.GlobalGradientAt(Vec::Ones(6))).norm(),
            1e-10);
}

}  // namespace
}  // namespace airfl
