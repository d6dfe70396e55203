// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "fbg/descriptors.hpp"
#include "fbg/error.hpp"
#include "fbg/evaluation.hpp"
#include "fbg/experiment.hpp"
#include "fbg/model.hpp"
#include "fbg/partition.hpp"
#include "fbg/pooling.hpp"
#include "fbg/raster.hpp"
#include "fbg/synth.hpp"
#include "oracles.hpp"

using namespace fbg;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Counter {
 public:
  void check(bool ok, const std::string& what) {
    ++checks_;
    if (!ok) {
      ++violations_;
      if (first_.empty()) first_ = what;
    }
  }
  std::size_t checks() const { return checks_; }
  std::size_t violations() const { return violations_; }
  std::string summary() const {
    std::ostringstream s;
    s << checks_ << " checks, " << violations_ << " violations";
    if (!first_.empty()) s << ", first: " << first_;
    return s.str();
  }

 private:
  std::size_t checks_ = 0;
  std::size_t violations_ = 0;
  std::string first_;
};

// The shared mask corpus for the geometry criteria.
std::vector<BinaryMask> mask_corpus() {
  std::mt19937_64 rng(2024);
  std::vector<BinaryMask> out;
  for (int i = 0; i < 240; ++i) {
    const int w = 1 + static_cast<int>(rng() % 32);
    const int h = 1 + static_cast<int>(rng() % 32);
    out.push_back(oracle::random_mask(rng, w, h));
  }
  // Degenerate shapes the random generator rarely hits.
  out.push_back(BinaryMask::full(32, 32));
  out.push_back(BinaryMask::full(1, 1));
  BinaryMask dot(9, 7);
  dot.set(4, 3);
  out.push_back(dot);
  return out;
}

char letter(const RegionId& r) {
  switch (r.tag) {
    case RegionTag::kFigure: return 'F';
    case RegionTag::kBorder: return 'B';
    case RegionTag::kGround: return 'G';
  }
  return '?';
}

constexpr double kBorderWidths[] = {0.0, 1.0, 2.5, 5.0};
constexpr BorderSide kSides[] = {BorderSide::kExterior, BorderSide::kInterior,
                                 BorderSide::kStraddle};

Outcome geometry_oracles(const std::vector<BinaryMask>& corpus) {
  const auto start = std::chrono::steady_clock::now();
  Counter c;
  for (std::size_t m = 0; m < corpus.size(); ++m) {
    const auto& mask = corpus[m];
    const auto tag = "mask " + std::to_string(m);
    for (bool inside : {true, false}) {
      for (bool background : {true, false}) {
        const auto want = oracle::edt_squared(mask, inside, background);
        const auto seeds = inside ? Seeds::kInside : Seeds::kOutside;
        const auto boundary =
            background ? ImageBoundary::kBackground : ImageBoundary::kIgnore;
        if (!want) {
          bool threw = false;
          try {
            euclidean_distance_transform(mask, seeds, boundary);
          } catch (const Error& e) {
            threw = e.code() == ErrorCode::kNoSeeds;
          }
          c.check(threw, tag + " edt without seeds");
          continue;
        }
        const auto got = euclidean_distance_transform(mask, seeds, boundary);
        c.check(std::ranges::equal(got.squared_values(), *want), tag + " edt");
      }
    }
    for (double r : {0.0, 1.0, 1.5, 3.0, 4.5}) {
      c.check(dilate_disc(mask, r) == oracle::dilate(mask, r), tag + " dilate");
    }
    for (double bw : kBorderWidths) {
      for (auto side : kSides) {
        const auto p = fbg_partition(mask, bw, side);
        const auto want = oracle::fbg_regions(mask, bw, side);
        bool same = true;
        for (std::size_t i = 0; i < want.size(); ++i) {
          same = same && letter(p.assignment()[i]) == want[i];
        }
        c.check(same, tag + " fbg " + to_string(side));
      }
    }
    for (int layers = 1; layers <= 5; ++layers) {
      const auto got = crown_layers(mask, layers);
      c.check(got.cells == oracle::crown(mask, layers), tag + " crown");
    }
    c.check(cartesian_quadrants(mask).cells == oracle::quadrants(mask),
            tag + " quadrants");
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  std::ostringstream s;
  s << corpus.size() << " masks, " << c.summary() << ", " << secs << " s";
  return {c.violations() == 0 && secs < 30.0, s.str()};
}

Outcome geometry_laws(const std::vector<BinaryMask>& corpus) {
  Counter c;
  for (std::size_t m = 0; m < corpus.size(); ++m) {
    const auto& mask = corpus[m];
    const int w = mask.width();
    const int h = mask.height();
    const auto tag = "mask " + std::to_string(m);
    const auto outside =
        euclidean_distance_transform(mask, Seeds::kInside, ImageBoundary::kIgnore);
    std::optional<DistanceField> depth;
    try {
      depth = euclidean_distance_transform(mask, Seeds::kOutside,
                                           ImageBoundary::kBackground);
    } catch (const Error&) {
    }

    for (double bw : kBorderWidths) {
      for (auto side : kSides) {
        const auto p = fbg_partition(mask, bw, side);
        // Tiling: the three regions are disjoint and cover the image.
        const auto f = p.region_mask(RegionId::figure());
        const auto b = p.region_mask(RegionId::border());
        const auto g = p.region_mask(RegionId::ground());
        c.check(f.count() + b.count() + g.count() ==
                    static_cast<std::size_t>(w) * h,
                tag + " tiling");
        // Border membership is a threshold on the distance to the contour.
        const double half = side == BorderSide::kStraddle ? bw / 2.0 : bw;
        for (int y = 0; y < h; ++y) {
          for (int x = 0; x < w; ++x) {
            const bool in = mask.test(x, y);
            bool want_border = false;
            if (side != BorderSide::kInterior && !in) {
              want_border = outside.at(x, y) <= half;
            }
            if (side != BorderSide::kExterior && in) {
              want_border = depth->at(x, y) <= half;
            }
            c.check(b.test(x, y) == want_border, tag + " border threshold");
            if (!want_border) {
              c.check(f.test(x, y) == in, tag + " figure is the mask");
            }
          }
        }
      }
    }

    for (int layers = 1; layers <= 5; ++layers) {
      const auto cells = crown_layers(mask, layers);
      const auto spec = LayerSpec::logarithmic(depth->max(), layers);
      std::vector<double> lo(layers, INFINITY);
      std::vector<double> hi(layers, -INFINITY);
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          const int k = cells.at(x, y);
          c.check((k >= 0) == mask.test(x, y), tag + " crown covers mask");
          if (k < 0) continue;
          const double d = depth->at(x, y);
          lo[k] = std::min(lo[k], d);
          hi[k] = std::max(hi[k], d);
          if (k > 0) c.check(d <= spec.thresholds[k - 1], tag + " crown upper");
          if (k + 1 < layers) c.check(d > spec.thresholds[k], tag + " crown lower");
        }
      }
      // Nesting: deeper layers hold strictly deeper pixels.
      for (int k = 0; k + 1 < layers; ++k) {
        if (hi[k + 1] >= 0 && lo[k] < INFINITY) {
          c.check(lo[k] > hi[k + 1], tag + " crown nesting");
        }
      }
    }

    const auto quad = cartesian_quadrants(mask);
    std::int64_t n = 0, sx = 0, sy = 0;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (mask.test(x, y)) {
          ++n;
          sx += x;
          sy += y;
        }
      }
    }
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (!mask.test(x, y)) continue;
        const int east = static_cast<std::int64_t>(x) * n >= sx;
        const int south = static_cast<std::int64_t>(y) * n >= sy;
        c.check(quad.at(x, y) == 2 * south + east, tag + " quadrant centroid");
      }
    }
  }
  return {c.violations() == 0, c.summary()};
}

SymmetricMatrix rotate(const SymmetricMatrix& a,
                       const std::vector<std::vector<double>>& r) {
  const int d = a.size();
  SymmetricMatrix out(d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      double s = 0.0;
      for (int p = 0; p < d; ++p) {
        for (int q = 0; q < d; ++q) s += r[i][p] * a(p, q) * r[j][q];
      }
      out(i, j) = s;
    }
  }
  return out;
}

Outcome o2p_numerics() {
  std::mt19937_64 rng(77);
  Counter c;
  double worst_rot = 0.0, worst_iso = 0.0, worst_oracle = 0.0;
  const double eps = 1e-3;
  for (int t = 0; t < 100; ++t) {
    const int d = 2 + static_cast<int>(rng() % 11);
    const int n = 1 + static_cast<int>(rng() % 30);
    const auto pool = oracle::random_pool(rng, n, d);
    const auto tag = "pool " + std::to_string(t);

    const auto m = second_moment(pool, eps);
    const auto eig = jacobi_eigen(m);
    c.check(*std::ranges::min_element(eig.values) >= eps - 1e-12, tag + " psd floor");

    const auto r = oracle::random_orthogonal(rng, d);
    auto rotated = pool;
    for (std::size_t k = 0; k < pool.size(); ++k) {
      for (int i = 0; i < d; ++i) {
        double s = 0.0;
        for (int j = 0; j < d; ++j) s += r[i][j] * pool[k].vector[j];
        rotated[k].vector[i] = s;
      }
    }
    const auto l = log_map(m);
    const auto want = rotate(l, r);
    const auto got = log_map(second_moment(rotated, eps));
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        worst_rot = std::max(worst_rot, std::abs(got(i, j) - want(i, j)));
      }
    }

    const auto other = log_map(second_moment(oracle::random_pool(rng, n, d), eps));
    const auto va = flatten_upper(l);
    const auto vb = flatten_upper(other);
    double dot = 0.0, frob = 0.0;
    for (std::size_t k = 0; k < va.size(); ++k) dot += va[k] * vb[k];
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) frob += l(i, j) * other(i, j);
    }
    worst_iso = std::max(worst_iso, std::abs(dot - frob));

    std::vector<std::vector<double>> rows;
    for (const auto& x : pool) rows.push_back(x.vector);
    const auto ref = oracle::o2p(rows, eps, 0.5);
    const auto mine = o2p_pool(pool, {eps, 0.5}, d).vector;
    for (std::size_t k = 0; k < ref.size(); ++k) {
      worst_oracle = std::max(worst_oracle, std::abs(ref[k] - mine[k]));
    }
  }
  c.check(worst_rot <= 1e-8, "rotation equivariance");
  c.check(worst_iso <= 1e-9, "flattening isometry");
  c.check(worst_oracle <= 1e-8, "oracle agreement");
  std::ostringstream s;
  s << "100 pools, max rotation err " << worst_rot << ", max isometry err "
    << worst_iso << ", max oracle err " << worst_oracle << ", " << c.summary();
  return {c.violations() == 0, s.str()};
}

Outcome descriptor_masking() {
  std::mt19937_64 rng(404);
  Counter c;
  const auto img = oracle::random_image(rng, 64, 64);
  const SiftExtractor ex(img);
  const Rect frame{0, 0, 64, 64};
  const auto full = BinaryMask::full(64, 64);
  for (const auto& s : grid_samples(64, 64, {4, {16, 24, 32}})) {
    c.check(ex.compute(s, nullptr, frame).vector == ex.compute(s, &full, frame).vector,
            "full mask equals unmasked");
  }

  GrayImage edge(32, 32);
  for (int y = 0; y < 32; ++y) {
    for (int x = 16; x < 32; ++x) edge.set(x, y, 1.0);
  }
  const auto d = SiftExtractor(edge).compute({{16, 16}, 16}, nullptr, {0, 0, 32, 32});
  double total = 0.0, horizontal = 0.0;
  for (int k = 0; k < 128; ++k) {
    total += d.vector[k];
    if (k % 8 == 0 || k % 8 == 4) horizontal += d.vector[k];
  }
  const double share = total > 0.0 ? horizontal / total : 0.0;
  c.check(share >= 0.9, "vertical edge concentration");

  const auto mask = oracle::random_mask(rng, 64, 64);
  std::uniform_int_distribution<int> pos(16, 48);
  std::uniform_int_distribution<int> sc(0, 2);
  double worst = 0.0;
  for (int t = 0; t < 3; ++t) {
    const int scale = 16 + 8 * sc(rng);
    const int x = pos(rng);
    const int y = pos(rng);
    for (const BinaryMask* m : {static_cast<const BinaryMask*>(nullptr), &mask}) {
      const auto got = ex.compute({{x, y}, scale}, m, frame);
      const auto want = oracle::sift_gradient(img, x, y, scale, m);
      for (int k = 0; k < 128; ++k) {
        worst = std::max(worst, std::abs(got.vector[k] - want[k]));
      }
    }
  }
  c.check(worst <= 1e-10, "reference extractor");
  std::ostringstream s;
  s << "edge share " << share << ", max reference err " << worst << ", "
    << c.summary();
  return {c.violations() == 0, s.str()};
}

Outcome metric_exactness() {
  std::mt19937_64 rng(55);
  Counter c;
  for (int t = 0; t < 50; ++t) {
    const int w = 1 + static_cast<int>(rng() % 32);
    const int h = 1 + static_cast<int>(rng() % 32);
    const int k = 2 + static_cast<int>(rng() % 5);
    std::uniform_int_distribution<int> lab(0, k - 1);
    std::bernoulli_distribution flip(0.35), hole(0.08);
    LabelMap gt(w, h), pr(w, h);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const auto g = static_cast<std::uint8_t>(lab(rng));
        gt.set(x, y, hole(rng) ? kVoidLabel : g);
        pr.set(x, y, flip(rng) ? static_cast<std::uint8_t>(lab(rng)) : g);
      }
    }
    const auto tag = "pair " + std::to_string(t);
    for (bool bg : {true, false}) {
      const std::vector<AacImage> imgs{{"p", &pr, &gt}};
      const auto got = aac(imgs, k, bg);
      const auto want = oracle::aac({pr}, {gt}, k, bg);
      c.check(got.accuracy == want.accuracy && got.mean == want.mean,
              tag + " triple loop");
    }
    // Changing predictions on void pixels changes nothing.
    LabelMap pr2 = pr;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (gt.at(x, y) == kVoidLabel) pr2.set(x, y, static_cast<std::uint8_t>(lab(rng)));
      }
    }
    const std::vector<AacImage> a{{"p", &pr, &gt}}, b{{"p", &pr2, &gt}};
    const auto ra = aac(a, k, true);
    const auto rb = aac(b, k, true);
    c.check(ra.accuracy == rb.accuracy && ra.mean == rb.mean, tag + " void invariance");
  }
  return {c.violations() == 0, "50 labelmap pairs, " + c.summary()};
}

Outcome ridge_optimality() {
  std::mt19937_64 rng(66);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Counter c;
  double worst_grad = 0.0, worst_oracle = 0.0;
  for (int t = 0; t < 20; ++t) {
    const int n = 3 + static_cast<int>(rng() % 40);
    const int d = 1 + static_cast<int>(rng() % 25);
    const double lambda = std::pow(10.0, -2.0 + 3.0 * u(rng));
    std::vector<TrainExample> ex(n);
    std::vector<std::vector<double>> z;
    std::vector<double> target;
    for (auto& e : ex) {
      e.feature.resize(d);
      for (auto& v : e.feature) v = g(rng);
      e.targets = {u(rng)};
      z.push_back(e.feature);
      target.push_back(e.targets[0]);
    }
    const auto m = train_ridge(ex, {lambda, false}, {"c"});
    const auto& w = m.weights()[0];
    const double b = m.bias()[0];
    std::vector<double> grad(d + 1, 0.0);
    for (int j = 0; j < d; ++j) grad[j] = 2.0 * lambda * w[j];
    for (const auto& e : ex) {
      double r = b - e.targets[0];
      for (int j = 0; j < d; ++j) r += w[j] * e.feature[j];
      for (int j = 0; j < d; ++j) grad[j] += 2.0 * r * e.feature[j];
      grad[d] += 2.0 * r;
    }
    double norm = 0.0;
    for (double v : grad) norm += v * v;
    worst_grad = std::max(worst_grad, std::sqrt(norm));

    const auto ref = oracle::gradient_ridge(z, target, lambda);
    for (int j = 0; j < d; ++j) {
      worst_oracle = std::max(worst_oracle, std::abs(ref.weights[j] - w[j]));
    }
    worst_oracle = std::max(worst_oracle, std::abs(ref.bias - b));
  }
  c.check(worst_grad < 1e-8, "gradient norm");
  c.check(worst_oracle <= 1e-6, "iterative oracle");
  std::ostringstream s;
  s << "20 systems, max gradient norm " << worst_grad << ", max oracle err "
    << worst_oracle;
  return {c.violations() == 0, s.str()};
}

FeatureConfig esift(std::vector<RegionSlot> slots) {
  return FeatureConfig::uniform(slots, {DescriptorKind::kESift});
}

double mean_aac(const DatasetManifest& m, const FeatureConfig& config) {
  RunOptions opts;
  opts.eval_split = "test";
  return run_experiment(m, config, opts).aac.mean;
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("fbg_acceptance_" + name);
  fs::remove_all(p);
  return p;
}

Outcome border_gain() {
  const auto start = std::chrono::steady_clock::now();
  const auto dir = scratch("halo");
  SynthOptions o;
  o.seed = 1;
  o.n_train = 200;
  o.n_test = 100;
  const auto m = synth_border_benchmark(o, dir);
  const double f = mean_aac(m, esift({RegionSlot::kFigure}));
  const double fb = mean_aac(m, esift({RegionSlot::kFigure, RegionSlot::kBorder}));
  fs::remove_all(dir);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  std::ostringstream s;
  s << "F " << f << ", F,B " << fb << ", gain " << fb - f << " (need >= 10), "
    << secs << " s";
  return {fb - f >= 10.0 && secs < 600.0, s.str()};
}

Outcome pyramid_gain() {
  const auto dir = scratch("radial");
  SynthOptions o;
  o.seed = 1;
  o.n_train = 200;
  o.n_test = 100;
  o.variant = SynthVariant::kRadial;
  const auto m = synth_border_benchmark(o, dir);
  const double f = mean_aac(m, esift({RegionSlot::kFigure}));
  auto sp = esift({RegionSlot::kFigure, RegionSlot::kSpFigure});
  sp.sp = {SpKind::kCartesian};
  const double fsp = mean_aac(m, sp);
  fs::remove_all(dir);
  std::ostringstream s;
  s << "F " << f << ", F+SPF cartesian " << fsp << ", gain " << fsp - f;
  return {fsp >= f, s.str()};
}

Outcome determinism() {
  const auto dir = scratch("determinism");
  SynthOptions o;
  o.seed = 7;
  o.n_train = 16;
  o.n_test = 8;
  o.image_size = 64;
  const auto m = synth_border_benchmark(o, dir);
  auto config = esift({RegionSlot::kFigure, RegionSlot::kBorder});
  config.grid.stride = 8;
  auto report = [&](int jobs) {
    RunOptions opts;
    opts.jobs = jobs;
    return run_experiment(m, config, opts).json.dump(2);
  };
  const auto a = report(1);
  const auto b = report(8);
  const auto c = report(1);
  fs::remove_all(dir);
  std::ostringstream s;
  s << "jobs 1 vs 8 " << (a == b ? "identical" : "differ") << ", rerun "
    << (a == c ? "identical" : "differ") << ", " << a.size() << " bytes";
  return {a == b && a == c, s.str()};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const auto corpus = mask_corpus();
  const std::vector<Criterion> criteria{
      {"geometry matches brute force", [&] { return geometry_oracles(corpus); }},
      {"tiling and width laws", [&] { return geometry_laws(corpus); }},
      {"O2P numerics", o2p_numerics},
      {"descriptor masking", descriptor_masking},
      {"metric exactness", metric_exactness},
      {"ridge optimality", ridge_optimality},
      {"Border gain on the halo benchmark", border_gain},
      {"pyramid non-inferiority on the radial benchmark", pyramid_gain},
      {"determinism across job counts and reruns", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome out;
    try {
      out = criteria[i].run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    failed += !out.pass;
    std::printf("%s criterion %zu: %s (%s)\n", out.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].name, out.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n",
              static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
