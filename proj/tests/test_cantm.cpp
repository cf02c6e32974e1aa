#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "gradcheck.hpp"
#include "narrative/cantm.hpp"
#include "narrative/error.hpp"
#include "narrative/synthetic.hpp"
#include "support.hpp"

using namespace narrative;

namespace {

Matrix row(std::initializer_list<double> v) {
  Matrix m(1, static_cast<Eigen::Index>(v.size()));
  Eigen::Index j = 0;
  for (double x : v) m(0, j++) = x;
  return m;
}

Vector vec(std::initializer_list<double> v) { return row(v).transpose(); }

CantmParams perturbed(const CantmDims& dims, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  CantmParams p = CantmParams::random(dims, rng);
  std::normal_distribution<double> n(0.0, 0.5);
  for (auto& t : p.tensors()) {
    for (Eigen::Index i = 0; i < t.value->size(); ++i) t.value->data()[i] += n(rng);
  }
  return p;
}

double sum(const Vector& v) { return v.sum(); }

// Scalar softmax over std::vector, used by the forward-pass oracle.
std::vector<double> softmax(const std::vector<double>& l) {
  double m = l[0];
  for (double x : l) m = std::max(m, x);
  std::vector<double> out(l.size());
  double z = 0;
  for (std::size_t i = 0; i < l.size(); ++i) z += out[i] = std::exp(l[i] - m);
  for (double& x : out) x /= z;
  return out;
}

// y_j = b_j + sum_i x_i W_ij with W stored (inputs x outputs).
std::vector<double> affine_loop(const std::vector<double>& x, const Matrix& w,
                                const Matrix& b) {
  std::vector<double> y(static_cast<std::size_t>(w.cols()));
  for (Eigen::Index j = 0; j < w.cols(); ++j) {
    double s = b(0, j);
    for (Eigen::Index i = 0; i < w.rows(); ++i) s += x[static_cast<std::size_t>(i)] * w(i, j);
    y[static_cast<std::size_t>(j)] = s;
  }
  return y;
}

}  // namespace

TEST_CASE("gradients match central differences on the tiny model") {
  for (auto kind : {EncoderKind::bow_mlp, EncoderKind::embed_avg}) {
    for (bool forcing : {false, true}) {
      CAPTURE(to_string(kind));
      CAPTURE(forcing);
      auto r = testing::check_tiny_cantm(kind, forcing, 7);
      CAPTURE(r.worst_name);
      CHECK(r.checked > 300);
      CHECK(r.within == r.checked);
      CHECK(r.worst <= 1e-4);
    }
  }
}

TEST_CASE("gradients stay correct when logvar is clamped") {
  CantmDims dims{2, 2, 2, 3};
  CantmParams p = perturbed(dims, 3);
  p.m1_lv_b = row({25.0, 0.1});  // first unit saturates the clamp
  p.m2_lv_b = row({-30.0, 0.2});
  CantmBatch b{Matrix{{1, 0, 2}, {0, 3, 1}}, Matrix{{0.2, -0.4}, {0.5, 0.1}},
               {Label::Cons, Label::PE}};
  LatentNoise noise{Matrix{{0.3, -1.1}, {0.8, 0.2}}, Matrix{{-0.5, 0.4}, {1.2, -0.7}}};
  LossOptions opt;
  CantmParams g = CantmParams::zeros(dims);
  Matrix gh;
  cantm_loss(b, p, opt, noise, &g, &gh);
  CHECK(g.m1_lv_b(0, 0) == 0.0);
  CHECK(g.m2_lv_b(0, 0) == 0.0);
  auto r = testing::check_gradients(p.tensors(), const_tensors(g),
                                    [&] { return cantm_loss(b, p, opt, noise).total; },
                                    1e-4);
  CAPTURE(r.worst_name);
  CHECK(r.within == r.checked);

  // dLoss/dh against differences on the feature rows.
  std::vector<TensorRef> hp = {{"h", &b.h}};
  std::vector<ConstTensorRef> hg = {{"h", &gh}};
  auto rh = testing::check_gradients(hp, hg,
                                     [&] { return cantm_loss(b, p, opt, noise).total; }, 1e-4);
  CHECK(rh.within == rh.checked);
}

TEST_CASE("m1_encode") {
  CantmDims dims{3, 2, 2, 4};
  SUBCASE("zero input and parameters give the standard normal") {
    auto q = m1_encode(Vector::Zero(3), CantmParams::zeros(dims));
    CHECK(q.mu.isZero());
    CHECK(q.logvar.isZero());
  }
  SUBCASE("hand matrix multiply") {
    CantmParams p = CantmParams::zeros(dims);
    p.m1_mu_w = Matrix{{1, 2}, {0, -1}, {3, 0.5}};
    p.m1_mu_b = row({0.1, -0.2});
    p.m1_lv_w = Matrix{{0.5, 0}, {1, 1}, {-1, 2}};
    p.m1_lv_b = row({0, 1});
    auto q = m1_encode(vec({1, 2, -1}), p);
    // mu = [1*1 + 2*0 + -1*3 + 0.1, 1*2 + 2*-1 + -1*0.5 - 0.2]
    CHECK(q.mu(0) == doctest::Approx(-1.9).epsilon(1e-12));
    CHECK(q.mu(1) == doctest::Approx(-0.7).epsilon(1e-12));
    // logvar = [0.5 + 2 + 1, 0 + 2 - 2 + 1]
    CHECK(q.logvar(0) == doctest::Approx(3.5).epsilon(1e-12));
    CHECK(q.logvar(1) == doctest::Approx(1.0).epsilon(1e-12));
    auto again = m1_encode(vec({1, 2, -1}), p);
    CHECK(again.mu == q.mu);
    CHECK(again.logvar == q.logvar);
  }
  SUBCASE("logvar is clamped") {
    CantmParams p = CantmParams::zeros(dims);
    p.m1_lv_b = row({50, -50});
    auto q = m1_encode(Vector::Zero(3), p);
    CHECK(q.logvar(0) == 10.0);
    CHECK(q.logvar(1) == -10.0);
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(m1_encode(Vector::Zero(4), CantmParams::zeros(dims)), Error);
  }
}

TEST_CASE("reparameterize") {
  GaussianParams q{vec({0.5, -1}), vec({0.3, 2})};
  CHECK(reparameterize(q, Vector::Zero(2)).z == q.mu);
  GaussianParams unit{Vector::Zero(3), Vector::Zero(3)};
  Vector n = vec({0.4, -2, 1.5});
  CHECK(reparameterize(unit, n).z.isApprox(n));
  GaussianParams two{vec({1}), vec({2 * std::log(2.0)})};
  CHECK(reparameterize(two, vec({1})).z(0) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(reparameterize(two, vec({1}), LatentSource::m2).source == LatentSource::m2);
  CHECK_THROWS_AS(reparameterize(two, vec({1, 2})), Error);
}

TEST_CASE("reparameterized draws have the posterior moments") {
  GaussianParams q{vec({0.5}), vec({std::log(4.0)})};
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal;
  const int n = 100000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double z = reparameterize(q, vec({normal(rng)})).z(0);
    s += z;
    s2 += z * z;
  }
  const double mean = s / n;
  const double var = s2 / n - mean * mean;
  CHECK(std::abs(mean - 0.5) <= 0.02);
  CHECK(std::abs(var - 4.0) <= 0.15);
}

TEST_CASE("kl_std_normal") {
  CHECK(kl_std_normal({Vector::Zero(4), Vector::Zero(4)}) == 0.0);
  CHECK(kl_std_normal({vec({1}), vec({0})}) == doctest::Approx(0.5).epsilon(1e-15));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int t = 0; t < 200; ++t) {
    GaussianParams q{vec({u(rng), u(rng), u(rng)}), vec({u(rng), u(rng), u(rng)})};
    CHECK(kl_std_normal(q) >= 0.0);
  }
  CHECK(kl_std_normal({vec({0, 1e-3}), vec({0, 0})}) > 0.0);
  CHECK(kl_std_normal({vec({0}), vec({1e-3})}) > 0.0);
}

TEST_CASE("kl_std_normal agrees with a Monte-Carlo estimate") {
  // E_q[log q(z) - log p(z)] over 1e5 draws for a 3-dim Gaussian.
  GaussianParams q{vec({0.3, -0.2, 0.1}), vec({0.2, -0.4, 0.0})};
  std::mt19937_64 rng(9);
  std::normal_distribution<double> normal;
  const int n = 100000;
  double acc = 0;
  for (int i = 0; i < n; ++i) {
    double lq = 0, lp = 0;
    for (int d = 0; d < 3; ++d) {
      const double e = normal(rng);
      const double z = q.mu(d) + std::exp(q.logvar(d) / 2) * e;
      lq += -0.5 * (q.logvar(d) + e * e);
      lp += -0.5 * z * z;
    }
    acc += lq - lp;
  }
  CHECK(std::abs(acc / n - kl_std_normal(q)) <= 1e-2);
}

TEST_CASE("decode_bow and reconstruction loss") {
  SUBCASE("zero weights give the uniform distribution") {
    Vector p = decode_bow(vec({0.3, -1}), Matrix::Zero(2, 5), Matrix::Zero(1, 5));
    for (Eigen::Index i = 0; i < 5; ++i) CHECK(p(i) == doctest::Approx(0.2).epsilon(1e-15));
  }
  SUBCASE("V=3 hand softmax") {
    // logits = [1, 2, 3] via identity-like weights plus bias
    Matrix w{{1, 0, 1}, {0, 1, 1}};
    Vector p = decode_bow(vec({1, 2}), w, row({0, 0, 0}));
    const double z = std::exp(1.0) + std::exp(2.0) + std::exp(3.0);
    CHECK(p(0) == doctest::Approx(std::exp(1.0) / z).epsilon(1e-12));
    CHECK(p(1) == doctest::Approx(std::exp(2.0) / z).epsilon(1e-12));
    CHECK(p(2) == doctest::Approx(std::exp(3.0) / z).epsilon(1e-12));
  }
  SUBCASE("large logits stay normalized") {
    Vector p = decode_bow(vec({1}), row({800, 799, -800}), row({0, 0, 0}));
    CHECK(sum(p) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p.allFinite());
  }
  SUBCASE("negative log likelihood of counts") {
    BowVector bow{4, {{0, 1}, {2, 3}}};
    Vector uniform = Vector::Constant(4, 0.25);
    CHECK(bow_reconstruction_loss(bow, uniform) == doctest::Approx(4 * std::log(4.0)).epsilon(1e-12));
    BowVector two{2, {{0, 2}, {1, 2}}};
    CHECK(bow_reconstruction_loss(two, vec({0.5, 0.5})) ==
          doctest::Approx(4 * std::log(2.0)).epsilon(1e-12));
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(decode_bow(vec({1, 2, 3}), Matrix::Zero(2, 3), Matrix::Zero(1, 3)), Error);
  }
}

TEST_CASE("classify_m1") {
  CantmDims dims{2, 2, 2, 3};
  CantmParams p = CantmParams::zeros(dims);
  LatentSample z{vec({0.7, -0.3}), LatentSource::m1};
  ClassProbs u = classify_m1(z, p);
  for (double x : u.probs) CHECK(x == doctest::Approx(1.0 / 7).epsilon(1e-15));
  CHECK(u.label() == Label::Cons);  // uniform tie goes to the lowest index

  p.cls_w = Matrix{{1, 0, 2, 0, -1, 0, 0}, {0, 3, 0, 1, 0, 0, -2}};
  p.cls_b = row({0.1, 0, 0, 0, 0, 0.5, 0});
  ClassProbs c = classify_m1(z, p);
  std::vector<double> logits = {0.7 + 0.1, -0.9, 1.4, -0.3, -0.7, 0.5, 0.6};
  auto oracle = softmax(logits);
  for (std::size_t k = 0; k < 7; ++k) {
    CHECK(c.probs[k] == doctest::Approx(oracle[k]).epsilon(1e-12));
  }
  CHECK(c.sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(c.label() == Label::LF);
  p.cls_b.array() += 123.0;
  CHECK(classify_m1(z, p).label() == Label::LF);
}

TEST_CASE("m2_encode and m2_decode") {
  CantmDims dims{2, 2, 2, 3};
  ClassProbs uniform = ClassProbs::uniform();
  SUBCASE("zero parameters") {
    CantmParams p = CantmParams::zeros(dims);
    auto q = m2_encode(Vector::Zero(2), uniform, p);
    CHECK(q.mu.isZero());
    CHECK(q.logvar.isZero());
    auto [bow, cls] = m2_decode({vec({0.4, 1}), LatentSource::m2}, uniform, p);
    for (Eigen::Index i = 0; i < 3; ++i) CHECK(bow(i) == doctest::Approx(1.0 / 3).epsilon(1e-15));
    for (double x : cls.probs) CHECK(x == doctest::Approx(1.0 / 7).epsilon(1e-15));
  }
  SUBCASE("concatenated affine oracle") {
    CantmParams p = perturbed(dims, 21);
    ClassProbs y;
    y.probs = {0.1, 0.2, 0.05, 0.3, 0.15, 0.1, 0.1};
    std::vector<double> hy = {0.4, -0.6};
    hy.insert(hy.end(), y.probs.begin(), y.probs.end());
    auto q = m2_encode(vec({0.4, -0.6}), y, p);
    auto mu = affine_loop(hy, p.m2_mu_w, p.m2_mu_b);
    auto lv = affine_loop(hy, p.m2_lv_w, p.m2_lv_b);
    for (std::size_t k = 0; k < 2; ++k) {
      CHECK(q.mu(static_cast<Eigen::Index>(k)) == doctest::Approx(mu[k]).epsilon(1e-12));
      CHECK(q.logvar(static_cast<Eigen::Index>(k)) ==
            doctest::Approx(std::clamp(lv[k], -10.0, 10.0)).epsilon(1e-12));
    }
    CHECK(m2_encode(vec({0.4, -0.6}), y, p).mu == q.mu);

    std::vector<double> zs = {0.9, -0.2};
    std::vector<double> zy = zs;
    zy.insert(zy.end(), y.probs.begin(), y.probs.end());
    auto [bow, cls] = m2_decode({vec({0.9, -0.2}), LatentSource::m2}, y, p);
    auto pb = softmax(affine_loop(zy, p.m2_dec_w, p.m2_dec_b));
    auto pc = softmax(affine_loop(zs, p.m2_cls_w, p.m2_cls_b));
    for (std::size_t v = 0; v < 3; ++v) {
      CHECK(bow(static_cast<Eigen::Index>(v)) == doctest::Approx(pb[v]).epsilon(1e-12));
    }
    for (std::size_t c = 0; c < 7; ++c) CHECK(cls.probs[c] == doctest::Approx(pc[c]).epsilon(1e-12));
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(m2_encode(Vector::Zero(3), uniform, CantmParams::zeros(dims)), Error);
  }
}

TEST_CASE("outputs are normalized for random models") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> n(0, 2);
  for (int t = 0; t < 50; ++t) {
    CantmDims dims{3, 4, 2, 6};
    CantmParams p = perturbed(dims, 100 + static_cast<std::uint64_t>(t));
    Vector h(3);
    for (auto& x : h) x = n(rng);
    auto q = m1_encode(h, p);
    LatentSample z{q.mu, LatentSource::m1};
    ClassProbs y = classify_m1(z, p);
    CHECK(y.sum() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(sum(decode_bow(z.z, p.m1_dec_w, p.m1_dec_b)) == doctest::Approx(1.0).epsilon(1e-9));
    auto q2 = m2_encode(h, y, p);
    auto [bow, cls] = m2_decode({q2.mu, LatentSource::m2}, y, p);
    CHECK(sum(bow) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(cls.sum() == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("loss terms match a scalar forward-pass oracle") {
  // 2 docs, V=3, K=2, K_s=2, D_h=2; every term recomputed element by element.
  CantmDims dims{2, 2, 2, 3};
  CantmParams p = perturbed(dims, 77);
  CantmBatch b{Matrix{{2, 0, 1}, {0, 1, 4}}, Matrix{{0.3, -0.8}, {-0.1, 0.6}},
               {Label::DPA, Label::SEN}};
  LatentNoise noise{Matrix{{0.5, -1.0}, {1.5, 0.2}}, Matrix{{-0.3, 0.7}, {0.1, -1.2}}};
  LossOptions opt;
  opt.weights = {1.0, 0.5, 2.0, 0.25, 1.5, 0.75, 3.0};
  LossBreakdown got = cantm_loss(b, p, opt, noise);

  LossBreakdown want;
  for (int i = 0; i < 2; ++i) {
    std::vector<double> h = {b.h(i, 0), b.h(i, 1)};
    std::vector<double> x = {b.bow(i, 0), b.bow(i, 1), b.bow(i, 2)};
    const std::size_t gold = label_index(b.labels[static_cast<std::size_t>(i)]);
    auto mu1 = affine_loop(h, p.m1_mu_w, p.m1_mu_b);
    auto lv1 = affine_loop(h, p.m1_lv_w, p.m1_lv_b);
    std::vector<double> z(2);
    for (int k = 0; k < 2; ++k) {
      lv1[k] = std::clamp(lv1[k], -10.0, 10.0);
      z[k] = mu1[k] + std::exp(lv1[k] / 2) * noise.m1(i, k);
      want.kl_m1 += -0.5 * (1 + lv1[k] - mu1[k] * mu1[k] - std::exp(lv1[k]));
    }
    auto p1 = softmax(affine_loop(z, p.m1_dec_w, p.m1_dec_b));
    auto yhat = softmax(affine_loop(z, p.cls_w, p.cls_b));
    auto pc = softmax(affine_loop(yhat, p.clsdec_w, p.clsdec_b));
    std::vector<double> hy = h;
    hy.insert(hy.end(), yhat.begin(), yhat.end());
    auto mu2 = affine_loop(hy, p.m2_mu_w, p.m2_mu_b);
    auto lv2 = affine_loop(hy, p.m2_lv_w, p.m2_lv_b);
    std::vector<double> zs(2);
    for (int k = 0; k < 2; ++k) {
      lv2[k] = std::clamp(lv2[k], -10.0, 10.0);
      zs[k] = mu2[k] + std::exp(lv2[k] / 2) * noise.m2(i, k);
      want.kl_m2 += -0.5 * (1 + lv2[k] - mu2[k] * mu2[k] - std::exp(lv2[k]));
    }
    std::vector<double> zy = zs;
    zy.insert(zy.end(), yhat.begin(), yhat.end());
    auto p2 = softmax(affine_loop(zy, p.m2_dec_w, p.m2_dec_b));
    auto y2 = softmax(affine_loop(zs, p.m2_cls_w, p.m2_cls_b));
    for (int v = 0; v < 3; ++v) {
      want.recon_m1 -= x[v] * std::log(p1[v]);
      want.recon_clsdec -= x[v] * std::log(pc[v]);
      want.recon_m2 -= x[v] * std::log(p2[v]);
    }
    want.ce_m1 -= std::log(yhat[gold]);
    want.ce_m2 -= std::log(y2[gold]);
  }
  for (double* t : {&want.recon_m1, &want.kl_m1, &want.ce_m1, &want.recon_clsdec,
                    &want.recon_m2, &want.kl_m2, &want.ce_m2}) {
    *t /= 2;
  }
  want.total = 1.0 * want.recon_m1 + 0.5 * want.kl_m1 + 2.0 * want.ce_m1 +
               0.25 * want.recon_clsdec + 1.5 * want.recon_m2 + 0.75 * want.kl_m2 +
               3.0 * want.ce_m2;
  CHECK(std::abs(got.recon_m1 - want.recon_m1) < 1e-6);
  CHECK(std::abs(got.kl_m1 - want.kl_m1) < 1e-6);
  CHECK(std::abs(got.ce_m1 - want.ce_m1) < 1e-6);
  CHECK(std::abs(got.recon_clsdec - want.recon_clsdec) < 1e-6);
  CHECK(std::abs(got.recon_m2 - want.recon_m2) < 1e-6);
  CHECK(std::abs(got.kl_m2 - want.kl_m2) < 1e-6);
  CHECK(std::abs(got.ce_m2 - want.ce_m2) < 1e-6);
  CHECK(std::abs(got.total - want.total) < 1e-6);
  for (double t : {got.recon_m1, got.kl_m1, got.ce_m1, got.recon_clsdec, got.recon_m2,
                   got.kl_m2, got.ce_m2}) {
    CHECK(t >= 0.0);
  }
  // Fixed noise makes the loss a pure function of its inputs.
  CHECK(cantm_loss(b, p, opt, noise).total == got.total);
}

TEST_CASE("loss edge cases") {
  CantmDims dims{2, 2, 2, 3};
  CantmParams p = perturbed(dims, 5);
  CantmBatch b{Matrix{{1, 1, 0}}, Matrix{{0.2, 0.1}}, {Label::MRE}};
  LatentNoise noise{Matrix{{0.1, 0.2}}, Matrix{{0.3, -0.4}}};
  SUBCASE("all weights zero give zero total") {
    LossOptions opt;
    opt.weights = {0, 0, 0, 0, 0, 0, 0};
    CHECK(cantm_loss(b, p, opt, noise).total == 0.0);
  }
  SUBCASE("confident correct classifiers have zero cross-entropy") {
    CantmParams q = p;
    q.cls_w.setZero();
    q.cls_b = Matrix::Constant(1, 7, -1000);
    q.cls_b(0, 3) = 1000;
    q.m2_cls_w.setZero();
    q.m2_cls_b = q.cls_b;
    auto l = cantm_loss(b, q, LossOptions{}, noise);
    CHECK(l.ce_m1 == doctest::Approx(0.0));
    CHECK(l.ce_m2 == doctest::Approx(0.0));
  }
  SUBCASE("non-finite terms are reported by name") {
    CantmParams q = p;
    q.m1_dec_b(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_WITH_AS(cantm_loss(b, q, LossOptions{}, noise), "non-finite loss term: recon_m1",
                         Error);
  }
  SUBCASE("mismatched batch parts") {
    CantmBatch bad = b;
    bad.labels.push_back(Label::PE);
    CHECK_THROWS_AS(cantm_loss(bad, p, LossOptions{}, noise), Error);
  }
}

TEST_CASE("parameter shapes are validated") {
  CantmDims dims{4, 3, 2, 10};
  CantmParams p = CantmParams::zeros(dims);
  CHECK_NOTHROW(p.validate(dims));
  CHECK(p.dims().vocab_size == 10);
  CHECK(p.m2_dec_w.rows() == 9);
  p.m2_cls_w = Matrix::Zero(3, 7);
  CHECK_THROWS_WITH_AS(p.validate(dims), doctest::Contains("m2_cls_w"), Error);
}

TEST_CASE("dev_split is stratified and deterministic") {
  std::vector<Example> ex;
  for (int i = 0; i < 50; ++i) {
    Example e;
    e.id = std::to_string(i);
    e.label = i < 40 ? Label::Cons : Label::PE;
    ex.push_back(e);
  }
  auto [train, dev] = dev_split(ex, 0.2, 3);
  CHECK(train.size() == 40);
  CHECK(dev.size() == 10);
  int cons = 0;
  for (auto i : dev) cons += ex[i].label == Label::Cons;
  CHECK(cons == 8);
  CHECK(dev_split(ex, 0.2, 3).second == dev);
}

namespace {

SyntheticCorpus small_corpus(std::uint64_t seed) {
  SyntheticSpec spec;
  spec.docs_per_class.fill(30);
  spec.seed = seed;
  return generate_synthetic(spec);
}

CantmConfig small_config() {
  CantmConfig cfg;
  cfg.topics = 8;
  cfg.class_topics = 4;
  cfg.epochs = 3;
  cfg.encoder.dim = 16;
  cfg.vocab.min_df = 1;
  return cfg;
}

}  // namespace

TEST_CASE("training is deterministic for a fixed seed") {
  auto corpus = small_corpus(4);
  auto a = train_cantm(corpus.documents, small_config());
  auto b = train_cantm(corpus.documents, small_config());
  REQUIRE(a->history().size() == 3);
  for (std::size_t e = 0; e < 3; ++e) {
    CHECK(a->history()[e].train_loss.total == b->history()[e].train_loss.total);
    CHECK(a->history()[e].dev_macro_f1 == b->history()[e].dev_macro_f1);
  }
  CHECK(a->params().cls_w == b->params().cls_w);
  const auto& d = corpus.documents.front();
  CHECK(a->predict_proba(d).probs == b->predict_proba(d).probs);
}

TEST_CASE("zero epochs return the initial parameters") {
  auto corpus = small_corpus(4);
  CantmConfig cfg = small_config();
  cfg.epochs = 0;
  auto model = train_cantm(corpus.documents, cfg);
  CHECK(model->history().empty());

  std::mt19937_64 rng(cfg.seed);
  Encoder enc = Encoder::create(cfg.encoder, model->featurizer().vocab().size(), rng);
  CantmParams init = CantmParams::random(
      {enc.dim(), cfg.topics, cfg.class_topics, model->featurizer().vocab().size()}, rng);
  CHECK(model->encoder().params().w == enc.params().w);
  CHECK(model->params().cls_w == init.cls_w);
  CHECK(model->params().m2_dec_w == init.m2_dec_w);
  CHECK(model->params().m1_mu_w == init.m1_mu_w);
}

TEST_CASE("prediction uses the posterior mean and handles empty text") {
  auto corpus = small_corpus(6);
  auto model = train_cantm(corpus.documents, small_config());
  auto empty = testing::doc("e", "");
  ClassProbs p = model->predict_proba(empty);
  CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(model->predict_proba(empty).probs == p.probs);
  const Example ex = model->featurizer().featurize(corpus.documents[3]);
  auto q = model->posterior_m1(model->encode(ex));
  CHECK(model->predict_example(ex).probs == classify_m1({q.mu, LatentSource::m1}, model->params()).probs);
}

TEST_CASE("training rejects bad input") {
  auto corpus = small_corpus(4);
  CHECK_THROWS_AS(train_cantm({}, small_config()), Error);
  std::vector<Document> docs = corpus.documents;
  docs[2].label.reset();
  CHECK_THROWS_WITH_AS(train_cantm(docs, small_config()), doctest::Contains("unlabeled"), Error);
  CantmConfig cfg = small_config();
  cfg.optimizer.learning_rate = 1e6;
  cfg.epochs = 20;
  CHECK_THROWS_WITH_AS(train_cantm(corpus.documents, cfg), doctest::Contains("training diverged at epoch"),
                       Error);
}
