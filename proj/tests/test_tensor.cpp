#include <cmath>
#include <vector>

#include "doctest.h"
#include "frt/tensor.hpp"

using namespace frt;

namespace {

// reference convolution: direct 6-nested-loop evaluation, independent of conv2d
template <class T>
std::vector<T> conv_reference(const std::vector<T>& in, int n, int cin, int h, int w,
                              const std::vector<T>& wt, int cout, int k,
                              const std::vector<T>& bias, int stride) {
  const int p = (k - 1) / 2;
  const int oh = (h + 2 * p - k) / stride + 1;
  const int ow = (w + 2 * p - k) / stride + 1;
  std::vector<T> out(size_t(n) * cout * oh * ow, T(0));
  for (int b = 0; b < n; ++b)
    for (int co = 0; co < cout; ++co)
      for (int oy = 0; oy < oh; ++oy)
        for (int ox = 0; ox < ow; ++ox) {
          T acc = bias[size_t(co)];
          for (int ci = 0; ci < cin; ++ci)
            for (int ky = 0; ky < k; ++ky)
              for (int kx = 0; kx < k; ++kx) {
                int iy = oy * stride + ky - p;
                int ix = ox * stride + kx - p;
                if (iy < 0 || iy >= h || ix < 0 || ix >= w) continue;
                acc += in[size_t(((b * cin + ci) * h + iy) * w + ix)] *
                       wt[size_t(((co * cin + ci) * k + ky) * k + kx)];
              }
          out[size_t(((b * cout + co) * oh + oy) * ow + ox)] = acc;
        }
  return out;
}

Tensor64 randt(Shape s, Rng& rng) { return Tensor64::randn(s, rng, 0.5); }

}  // namespace

TEST_SUITE("tensor") {

TEST_CASE("elementwise basics") {
  auto a = Tensor::from({2}, {1, 2});
  auto b = Tensor::from({2}, {3, 4});
  auto c = add(a, b);
  CHECK(c.data() == std::vector<float>{4, 6});

  CHECK(softplus(Tensor::scalar(0.f)).item() == doctest::Approx(std::log(2.0)).epsilon(1e-6));
  CHECK(leaky_relu(Tensor::scalar(-1.f), 0.2f).item() == doctest::Approx(-0.2));
  CHECK(sigmoid(Tensor::scalar(0.f)).item() == doctest::Approx(0.5));
  CHECK(vabs(Tensor::from({3}, {-2, 0, 5})).data() == std::vector<float>{2, 0, 5});

  // scalar broadcast both ways
  auto s = Tensor::scalar(2.f);
  CHECK(mul(a, s).data() == std::vector<float>{2, 4});
  CHECK(mul(s, a).data() == std::vector<float>{2, 4});
  CHECK_THROWS_AS(add(a, Tensor::from({3}, {1, 2, 3})), std::invalid_argument);
}

TEST_CASE("conv2d trivial cases") {
  auto ones = Tensor::full({1, 1, 3, 3}, 1.f);
  auto w = Tensor::full({1, 1, 3, 3}, 1.f);
  auto b = Tensor::zeros({1});
  auto out = conv2d(ones, w, b);
  CHECK(out.data()[4] == doctest::Approx(9));  // center: full overlap

  // identity kernel passes the input through
  auto ident = Tensor::zeros({1, 1, 3, 3});
  ident.data()[4] = 1.f;
  Rng rng(11);
  auto x = Tensor::randn({1, 1, 5, 4}, rng);
  auto y = conv2d(x, ident, b);
  CHECK(y.data() == x.data());

  CHECK_THROWS_AS(conv2d(Tensor::zeros({1, 2, 4, 4}), Tensor::zeros({1, 3, 3, 3}), b),
                  std::invalid_argument);
}

TEST_CASE("conv2d matches the loop reference") {
  Rng rng(42);
  auto x = Tensor64::randn({1, 2, 5, 5}, rng);
  auto w = Tensor64::randn({3, 2, 3, 3}, rng);
  auto b = Tensor64::randn({3}, rng);
  auto out = conv2d(x, w, b);
  auto ref = conv_reference(x.data(), 1, 2, 5, 5, w.data(), 3, 3, b.data(), 1);
  REQUIRE(out.data().size() == ref.size());
  for (size_t i = 0; i < ref.size(); ++i)
    CHECK(out.data()[i] == doctest::Approx(ref[i]).epsilon(1e-6));
}

TEST_CASE("conv2d equals the reference on all small shapes") {
  Rng rng(7);
  for (int h : {1, 2, 3, 5, 8})
    for (int k : {1, 3, 5})
      for (int stride : {1, 2}) {
        int w = (h * 3) % 8 + 1;
        int cin = 1 + (h + k) % 3, cout = 1 + (h * k) % 3, n = 1 + h % 2;
        auto x = Tensor64::randn({n, cin, h, w}, rng);
        auto wt = Tensor64::randn({cout, cin, k, k}, rng);
        auto b = Tensor64::randn({cout}, rng);
        auto out = conv2d(x, wt, b, stride);
        auto ref = conv_reference(x.data(), n, cin, h, w, wt.data(), cout, k, b.data(), stride);
        REQUIRE(out.data().size() == ref.size());
        for (size_t i = 0; i < ref.size(); ++i)
          CHECK(out.data()[i] == doctest::Approx(ref[i]).epsilon(1e-9));
      }
}

TEST_CASE("linear") {
  auto ident = Tensor::from({2, 2}, {1, 0, 0, 1});
  auto zb = Tensor::zeros({2});
  auto x = Tensor::from({1, 2}, {2, 3});
  CHECK(linear(x, ident, zb).data() == x.data());

  auto w = Tensor::from({1, 2}, {1, 1});
  auto b = Tensor::zeros({1});
  CHECK(linear(x, w, b).data()[0] == doctest::Approx(5));

  // random case against an explicit dot-product loop
  Rng rng(3);
  auto xr = Tensor64::randn({2, 4}, rng);
  auto wr = Tensor64::randn({3, 4}, rng);
  auto br = Tensor64::randn({3}, rng);
  auto out = linear(xr, wr, br);
  for (int n = 0; n < 2; ++n)
    for (int o = 0; o < 3; ++o) {
      double acc = br.data()[size_t(o)];
      for (int i = 0; i < 4; ++i) acc += xr.data()[size_t(n * 4 + i)] * wr.data()[size_t(o * 4 + i)];
      CHECK(out.data()[size_t(n * 3 + o)] == doctest::Approx(acc).epsilon(1e-6));
    }
  CHECK_THROWS_AS(linear(xr, Tensor64::zeros({3, 5}), br), std::invalid_argument);
}

TEST_CASE("resample2d") {
  Rng rng(5);
  auto x = Tensor::randn({1, 2, 4, 4}, rng);
  for (auto mode : {Resample::kNearest, Resample::kBilinear, Resample::kArea})
    CHECK(resample2d(x, mode, 1).data() == x.data());

  auto block = Tensor::from({1, 1, 2, 2}, {0, 0, 1, 1});
  CHECK(resample2d(block, Resample::kArea, 2).data()[0] == doctest::Approx(0.5));
  CHECK_THROWS_AS(resample2d(Tensor::zeros({1, 1, 3, 3}), Resample::kArea, 2),
                  std::invalid_argument);

  // bilinear x2 of a 1x2 row [1,3], align-corners-false:
  // src = (dst+0.5)/2 - 0.5 -> samples at -0.25, 0.25, 0.75, 1.25
  auto row = Tensor::from({1, 1, 1, 2}, {1, 3});
  auto up = resample2d(row, Resample::kBilinear, 2);
  REQUIRE(up.shape() == Shape{1, 1, 2, 4});
  const std::vector<float> expect{1.f, 1.5f, 2.5f, 3.f};
  for (int r = 0; r < 2; ++r)
    for (int i = 0; i < 4; ++i)
      CHECK(up.data()[size_t(r * 4 + i)] == doctest::Approx(expect[size_t(i)]));
  // the two interior samples straddle the segment midpoint, average 2
  CHECK(0.5f * (up.data()[1] + up.data()[2]) == doctest::Approx(2.0));

  // area-down then nearest-up preserves per-block means
  auto big = Tensor::randn({1, 1, 4, 4}, rng);
  auto down = resample2d(big, Resample::kArea, 2);
  auto back = resample2d(down, Resample::kNearest, 2);
  for (int by = 0; by < 2; ++by)
    for (int bx = 0; bx < 2; ++bx) {
      float blockmean = 0;
      for (int dy = 0; dy < 2; ++dy)
        for (int dx = 0; dx < 2; ++dx) blockmean += big.data()[size_t((by * 2 + dy) * 4 + bx * 2 + dx)];
      blockmean /= 4;
      CHECK(back.data()[size_t(by * 2 * 4 + bx * 2)] == doctest::Approx(blockmean).epsilon(1e-6));
    }
}

TEST_CASE("backward basics") {
  auto w = Tensor::from({2}, {1, 2}, true);
  auto loss = sum(mul(w, w));
  backward(loss);
  CHECK(w.grad()[0] == doctest::Approx(2));
  CHECK(w.grad()[1] == doctest::Approx(4));

  // repeated backward without reset accumulates on leaves
  backward(loss);
  CHECK(w.grad()[0] == doctest::Approx(4));
  CHECK(w.grad()[1] == doctest::Approx(8));

  // loss independent of w leaves the gradient at zero
  auto u = Tensor::from({2}, {1, 1}, true);
  auto v = Tensor::from({2}, {3, 4}, true);
  auto l2 = sum(mul(u, u));
  backward(l2);
  CHECK_FALSE(v.has_grad());

  CHECK_THROWS_AS(backward(mul(w, w)), std::invalid_argument);
}

TEST_CASE("forward evaluation is pure and repeatable") {
  Rng rng(9);
  auto x = Tensor::randn({1, 2, 6, 6}, rng);
  auto w = Tensor::randn({3, 2, 3, 3}, rng);
  auto b = Tensor::randn({3}, rng);
  auto x_before = x.data();
  auto run = [&] { return mean(leaky_relu(conv2d(x, w, b), 0.2f)); };
  auto r1 = run();
  auto r2 = run();
  CHECK(r1.data() == r2.data());
  CHECK(x.data() == x_before);
}

TEST_CASE("composite gradient vs central differences") {
  Rng rng(21);
  auto x = randt({1, 2, 4, 4}, rng).set_name("x");
  auto w = randt({2, 2, 3, 3}, rng).set_name("w");
  auto b = randt({2}, rng).set_name("b");
  auto fwd = [&] { return sum(leaky_relu(conv2d(x, w, b), 0.2)); };
  auto report = gradcheck(fwd, {x, w, b});
  CHECK(report.worst() < 1e-4);
}

TEST_CASE("gradcheck covers the remaining ops") {
  Rng rng(77);
  SUBCASE("elementwise chain") {
    auto a = randt({6}, rng).set_name("a");
    auto b = randt({6}, rng).set_name("b");
    auto fwd = [&] {
      auto t = mul(sigmoid(a), softplus(sub(a, b)));
      return mean(vabs(add(t, vexp(affine(b, 0.3, 0.1)))));
    };
    CHECK(gradcheck(fwd, {a, b}).worst() < 1e-4);
  }
  SUBCASE("log with clamp") {
    auto a = Tensor64::from({3}, {0.5, 1.5, 2.5}).set_name("a");
    auto fwd = [&] { return sum(vlog(a, 1e-8)); };
    CHECK(gradcheck(fwd, {a}).worst() < 1e-6);
  }
  SUBCASE("resample modes") {
    auto x = randt({1, 1, 4, 4}, rng).set_name("x");
    for (auto mode : {Resample::kNearest, Resample::kBilinear}) {
      auto fwd = [&] { return mean(mul(resample2d(x, mode, 2), resample2d(x, mode, 2))); };
      CHECK(gradcheck(fwd, {x}).worst() < 1e-4);
    }
    auto fwd2 = [&] {
      auto d = resample2d(x, Resample::kArea, 2);
      return mean(mul(d, d));
    };
    CHECK(gradcheck(fwd2, {x}).worst() < 1e-4);
  }
  SUBCASE("concat and slice") {
    auto a = randt({1, 2, 3, 3}, rng).set_name("a");
    auto b = randt({1, 3, 3, 3}, rng).set_name("b");
    auto fwd = [&] {
      auto cat = concat_channels<double>({a, b});
      return mean(mul(slice_channels(cat, 1, 4), slice_channels(cat, 0, 3)));
    };
    CHECK(gradcheck(fwd, {a, b}).worst() < 1e-4);
  }
  SUBCASE("gram") {
    auto f = randt({1, 3, 4, 4}, rng).set_name("f");
    auto fwd = [&] { return mean(vabs(gram(f))); };
    CHECK(gradcheck(fwd, {f}).worst() < 1e-4);
  }
  SUBCASE("channel affine") {
    auto x = randt({2, 3, 4, 4}, rng).set_name("x");
    auto g = randt({2, 3}, rng).set_name("g");
    auto s = randt({2, 3}, rng).set_name("s");
    auto fwd = [&] { return mean(mul(channel_affine(x, g, s), x)); };
    CHECK(gradcheck(fwd, {x, g, s}).worst() < 1e-4);
  }
  SUBCASE("spatial mean and unit normalize") {
    auto x = randt({2, 3, 4, 4}, rng).set_name("x");
    auto fwd = [&] { return mean(vabs(unit_normalize(spatial_mean(x)))); };
    CHECK(gradcheck(fwd, {x}).worst() < 1e-4);
  }
  SUBCASE("bilinear crop") {
    auto x = randt({1, 1, 8, 8}, rng).set_name("x");
    std::vector<BoxF> boxes{{0.1f, 0.2f, 0.7f, 0.9f}};
    auto fwd = [&] {
      auto p = bilinear_crop(x, boxes, 4);
      return mean(mul(p, p));
    };
    CHECK(gradcheck(fwd, {x}).worst() < 1e-4);
  }
}

TEST_CASE("gram properties") {
  CHECK(gram(Tensor::zeros({1, 2, 3, 3})).data() == std::vector<float>(4, 0.f));
  Rng rng(15);
  auto f = Tensor::randn({1, 1, 3, 3}, rng);
  double s = 0;
  for (float v : f.data()) s += double(v) * v;
  CHECK(gram(f).data()[0] == doctest::Approx(s / 9.0).epsilon(1e-6));

  auto g = gram(Tensor::randn({1, 4, 5, 5}, rng));
  for (int i = 0; i < 4; ++i) {
    CHECK(g.data()[size_t(i * 4 + i)] >= 0);
    for (int j = 0; j < 4; ++j)
      CHECK(g.data()[size_t(i * 4 + j)] == doctest::Approx(g.data()[size_t(j * 4 + i)]));
  }
}

TEST_CASE("adam") {
  SUBCASE("zero gradient leaves parameters unchanged") {
    auto p = Tensor::from({2}, {1, 2}, true).set_name("p");
    Adam<float> opt({p});
    opt.step();
    CHECK(p.data() == std::vector<float>{1, 2});
  }
  SUBCASE("single step with unit gradient") {
    auto p = Tensor::from({1}, {0}, true).set_name("p");
    p.grad()[0] = 1.f;
    Adam<float> opt({p});  // defaults: lr 1e-3, b1 0.9, b2 0.999, eps 1e-8
    opt.step();
    // m_hat = v_hat = 1 after bias correction, so delta = -lr / (1 + eps)
    CHECK(p.data()[0] == doctest::Approx(-0.001).epsilon(1e-4));
  }
  SUBCASE("two identical runs produce identical state") {
    auto run = [] {
      auto p = Tensor::from({3}, {0.5f, -0.25f, 1.f}, true).set_name("p");
      Adam<float> opt({p}, {0.01f, 0.9f, 0.999f, 1e-8f});
      for (int i = 0; i < 2; ++i) {
        p.zero_grad();
        auto loss = sum(mul(p, p));
        backward(loss);
        opt.step();
      }
      return p.data();
    };
    CHECK(run() == run());
  }
  SUBCASE("NaN gradient is reported with the parameter name") {
    auto p = Tensor::from({1}, {0}, true).set_name("bad_param");
    p.grad()[0] = std::nanf("");
    Adam<float> opt({p});
    CHECK_THROWS_WITH_AS(opt.step(), doctest::Contains("bad_param"), std::runtime_error);
  }
}

TEST_CASE("gradcheck on a linear layer is tight") {
  Rng rng(33);
  auto x = randt({2, 3}, rng).set_name("x");
  auto w = randt({4, 3}, rng).set_name("w");
  auto b = randt({4}, rng).set_name("b");
  auto fwd = [&] { return mean(linear(x, w, b)); };
  auto report = gradcheck(fwd, {x, w, b});
  CHECK(report.worst() < 1e-6);
}

}  // TEST_SUITE
