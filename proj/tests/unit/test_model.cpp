#include <cmath>
#include <random>

#include "doctest.h"
#include "tactile/core/error.hpp"
#include "tactile/model/losses.hpp"
#include "tactile/model/network.hpp"

using namespace tactile;
using namespace tactile::model;

namespace {

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> n(0.0, scale);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
    return m;
}

Matrix random_probs(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    return softmax_rows(random_matrix(rows, cols, rng));
}

// ---- independent oracles -------------------------------------------------

double oracle_kernel(const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b, double base) {
    double k = 0.0;
    for (int i = 0; i < 5; ++i) {
        double d = 0.0;
        for (Eigen::Index j = 0; j < a.size(); ++j) d += (a(j) - b(j)) * (a(j) - b(j));
        k += std::exp(-d / (base * std::pow(2.0, i - 2)));
    }
    return k;
}

double oracle_base(const Matrix& z) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < z.rows(); ++i)
        for (Eigen::Index j = 0; j < z.rows(); ++j)
            if (i != j)
                for (Eigen::Index k = 0; k < z.cols(); ++k) sum += std::pow(z(i, k) - z(j, k), 2);
    return sum / static_cast<double>(z.rows() * z.rows() - z.rows());
}

double oracle_lmmd(const Matrix& fs, const Matrix& ys, const Matrix& ft, const Matrix& pt) {
    Matrix z(fs.rows() + ft.rows(), fs.cols());
    z << fs, ft;
    const double base = oracle_base(z);
    double total = 0.0;
    int active = 0;
    for (Eigen::Index c = 0; c < ys.cols(); ++c) {
        double ms = 0.0;
        double mt = 0.0;
        for (Eigen::Index i = 0; i < ys.rows(); ++i) ms += ys(i, c);
        for (Eigen::Index i = 0; i < pt.rows(); ++i) mt += pt(i, c);
        bool predicted = false;
        for (Eigen::Index i = 0; i < pt.rows(); ++i) {
            Eigen::Index best = 0;
            for (Eigen::Index k = 1; k < pt.cols(); ++k)
                if (pt(i, k) > pt(i, best)) best = k;
            predicted = predicted || best == c;
        }
        if (ms <= 0.0 || mt <= 0.0 || !predicted) continue;
        ++active;
        double ss = 0.0, tt = 0.0, st = 0.0;
        for (Eigen::Index i = 0; i < fs.rows(); ++i)
            for (Eigen::Index j = 0; j < fs.rows(); ++j)
                ss += ys(i, c) / ms * ys(j, c) / ms * oracle_kernel(fs.row(i), fs.row(j), base);
        for (Eigen::Index i = 0; i < ft.rows(); ++i)
            for (Eigen::Index j = 0; j < ft.rows(); ++j)
                tt += pt(i, c) / mt * pt(j, c) / mt * oracle_kernel(ft.row(i), ft.row(j), base);
        for (Eigen::Index i = 0; i < fs.rows(); ++i)
            for (Eigen::Index j = 0; j < ft.rows(); ++j)
                st += ys(i, c) / ms * pt(j, c) / mt * oracle_kernel(fs.row(i), ft.row(j), base);
        total += ss + tt - 2.0 * st;
    }
    return active ? total / active : 0.0;
}

template <typename F>
Matrix finite_difference(Matrix x, F&& f, double h = 1e-5) {
    Matrix g(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double keep = x.data()[i];
        x.data()[i] = keep + h;
        const double up = f(x);
        x.data()[i] = keep - h;
        const double down = f(x);
        x.data()[i] = keep;
        g.data()[i] = (up - down) / (2 * h);
    }
    return g;
}

double rel_err(const Matrix& a, const Matrix& b) {
    return (a - b).norm() / std::max({a.norm(), b.norm(), 1e-30});
}

ModelConfig tiny_config() {
    ModelConfig cfg;
    cfg.image_size = 16;
    cfg.channels = {4, 6};
    cfg.bottleneck_dim = 8;
    cfg.num_classes = 4;
    return cfg;
}

InputBatch random_input(int batch, int size, std::mt19937_64& rng) {
    InputBatch in;
    in.batch = batch;
    in.channels = 6;
    in.height = in.width = size;
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    in.data.resize(static_cast<std::size_t>(6) * batch * size * size);
    for (double& v : in.data) v = u(rng);
    return in;
}

InputBatch slice(const InputBatch& in, int b) {
    InputBatch one = in;
    one.batch = 1;
    const std::size_t plane = static_cast<std::size_t>(in.height) * in.width;
    one.data.resize(6 * plane);
    for (int c = 0; c < 6; ++c)
        std::copy_n(in.data.begin() + (static_cast<std::size_t>(c) * in.batch + b) * plane, plane,
                    one.data.begin() + c * plane);
    return one;
}

}  // namespace

TEST_CASE("parameter layout is determined by the config") {
    ModelConfig cfg;
    const auto p = ModelParams::zeros(cfg);
    CHECK(p.at("encoder.conv0.weight").shape == std::vector<int>{16, 6, 3, 3});
    CHECK(p.at("encoder.conv2.weight").shape == std::vector<int>{64, 32, 3, 3});
    CHECK(p.at("bottleneck.weight").shape == std::vector<int>{256, 64});
    CHECK(p.at("classifier.weight").shape == std::vector<int>{361, 256});
    CHECK(p.at("regressor.weight").shape == std::vector<int>{3, 256});
    const std::size_t expected = (16 * 6 * 9 + 16) + (32 * 16 * 9 + 32) + (64 * 32 * 9 + 64) +
                                 (256 * 64 + 256) + (361 * 256 + 361) + (3 * 256 + 3);
    CHECK(p.parameter_count() == expected);
    CHECK(p.at("encoder.conv1.bias").group == ParamGroup::Backbone);
    CHECK(p.at("bottleneck.weight").group == ParamGroup::Head);
    CHECK(ModelParams::initialize(cfg, 3) == ModelParams::initialize(cfg, 3));
    CHECK_FALSE(ModelParams::initialize(cfg, 3) == ModelParams::initialize(cfg, 4));
    CHECK_THROWS_AS(p.at("nope"), InputError);
}

TEST_CASE("encode: zero weights give zero features, rows are batch-independent") {
    std::mt19937_64 rng(1);
    const ModelConfig cfg = tiny_config();
    const InputBatch in = random_input(8, 16, rng);
    CHECK(encode(ModelParams::zeros(cfg), in).isZero(0.0));

    const auto params = ModelParams::initialize(cfg, 5);
    const Matrix all = encode(params, in);
    CHECK(all.rows() == 8);
    CHECK(all.cols() == 8);
    CHECK(all.allFinite());
    for (int b = 0; b < 8; ++b) {
        const Matrix one = encode(params, slice(in, b));
        CHECK(one.row(0) == all.row(b));
    }
    InputBatch wrong = in;
    wrong.channels = 5;
    CHECK_THROWS_AS(encode(params, wrong), InputError);
}

TEST_CASE("pack_inputs concatenates contact then reference, centred and scaled") {
    Image contact(4, 4, 0.75f);
    Image reference(4, 4, 0.25f);
    const Image* c[] = {&contact};
    const Image* r[] = {&reference};
    const auto in = pack_inputs(c, r);
    CHECK(in.channels == 6);
    CHECK(in.data[0] == doctest::Approx(2.5));
    CHECK(in.data[3 * 16] == doctest::Approx(-2.5));
    Image small(3, 4);
    const Image* bad[] = {&small};
    CHECK_THROWS_AS(pack_inputs(c, bad), InputError);
}

TEST_CASE("classify produces softmax rows") {
    ModelConfig cfg = tiny_config();
    cfg.num_classes = 361;
    const Matrix zero_features = Matrix::Zero(3, cfg.bottleneck_dim);
    const Matrix uniform = classify(ModelParams::zeros(cfg), zero_features);
    for (Eigen::Index i = 0; i < uniform.size(); ++i) CHECK(uniform.data()[i] == doctest::Approx(1.0 / 361));

    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        std::mt19937_64 rng(seed);
        const auto params = ModelParams::initialize(cfg, seed);
        const Matrix f = random_matrix(4, cfg.bottleneck_dim, rng, 3.0);
        const Matrix probs = classify(params, f);
        const Matrix logits = classifier_logits(params, f);
        for (Eigen::Index i = 0; i < probs.rows(); ++i) {
            CHECK(std::abs(probs.row(i).sum() - 1.0) < 1e-9);
            CHECK(probs.row(i).minCoeff() >= 0.0);
            Eigen::Index a, b;
            probs.row(i).maxCoeff(&a);
            logits.row(i).maxCoeff(&b);
            CHECK(a == b);
        }
    }
}

TEST_CASE("regress outputs lie in (0,1) and respond monotonically to the bias") {
    const ModelConfig cfg = tiny_config();
    std::mt19937_64 rng(2);
    const Matrix f = random_matrix(5, cfg.bottleneck_dim, rng);
    const Matrix half = regress(ModelParams::zeros(cfg), f);
    CHECK((half.array() == 0.5).all());

    auto params = ModelParams::initialize(cfg, 9);
    const Matrix before = regress(params, f);
    CHECK((before.array() > 0.0).all());
    CHECK((before.array() < 1.0).all());
    params.at("regressor.bias").values[1] += 0.3;
    const Matrix after = regress(params, f);
    for (Eigen::Index i = 0; i < 5; ++i) {
        CHECK(after(i, 1) > before(i, 1));
        CHECK(after(i, 0) == before(i, 0));
    }
}

TEST_CASE("regression loss") {
    std::mt19937_64 rng(3);
    const Matrix t = random_matrix(4, 3, rng);
    CHECK(regression_loss(t, t) == 0.0);
    const Matrix shifted = (t.array() + 0.1).matrix();
    CHECK(regression_loss(shifted, t) == doctest::Approx(0.03).epsilon(1e-12));

    const Matrix p2 = random_matrix(2, 3, rng);
    const Matrix t2 = random_matrix(2, 3, rng);
    double brute = 0.0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 3; ++j) brute += (p2(i, j) - t2(i, j)) * (p2(i, j) - t2(i, j));
    CHECK(regression_loss(p2, t2) == doctest::Approx(brute / 2).epsilon(1e-14));
    CHECK_THROWS_AS(regression_loss(p2, t), InputError);

    Matrix grad;
    regression_loss(p2, t2, &grad);
    const Matrix fd = finite_difference(p2, [&](const Matrix& x) { return regression_loss(x, t2); });
    CHECK(rel_err(grad, fd) < 1e-8);
}

TEST_CASE("classification loss") {
    Matrix onehot = Matrix::Zero(2, 361);
    onehot(0, 5) = 1.0;
    onehot(1, 360) = 1.0;
    CHECK(classification_loss(onehot, onehot) == 0.0);
    const Matrix uniform = Matrix::Constant(2, 361, 1.0 / 361);
    CHECK(classification_loss(uniform, onehot) == doctest::Approx(std::log(361.0)).epsilon(1e-12));
    CHECK(std::log(361.0) == doctest::Approx(5.8889).epsilon(1e-4));

    std::mt19937_64 rng(4);
    const Matrix probs = random_probs(3, 6, rng);
    Matrix labels = Matrix::Zero(3, 6);
    const int truth[] = {2, 0, 5};
    for (int i = 0; i < 3; ++i) labels(i, truth[i]) = 1.0;
    double brute = 0.0;
    for (int i = 0; i < 3; ++i) brute -= std::log(probs(i, truth[i]));
    CHECK(classification_loss(probs, labels) == doctest::Approx(brute / 3).epsilon(1e-14));

    Matrix zero_at_truth = probs;
    zero_at_truth(0, 2) = 0.0;
    const double floored = classification_loss(zero_at_truth, labels);
    CHECK(std::isfinite(floored));
    CHECK(floored >= 0.0);

    Matrix grad;
    classification_loss(probs, labels, &grad);
    const Matrix fd = finite_difference(probs, [&](const Matrix& x) { return classification_loss(x, labels); });
    CHECK(rel_err(grad, fd) < 1e-8);
}

TEST_CASE("multi-bandwidth gaussian kernel") {
    Matrix twin(2, 3);
    twin << 0.4, -1.0, 2.0, 0.4, -1.0, 2.0;
    const Matrix k_twin = multi_gaussian_kernel(twin);
    CHECK((k_twin.array() == 5.0).all());

    std::mt19937_64 rng(5);
    const Matrix z = random_matrix(4, 3, rng);
    const Matrix k = multi_gaussian_kernel(z);
    CHECK(k == k.transpose());
    const double base = oracle_base(z);
    for (int i = 0; i < 4; ++i) {
        CHECK(k(i, i) == 5.0);
        for (int j = 0; j < 4; ++j) {
            CHECK(k(i, j) == doctest::Approx(oracle_kernel(z.row(i), z.row(j), base)).epsilon(1e-13));
            CHECK(k(i, j) > 0.0);
            CHECK(k(i, j) <= 5.0);
        }
    }
    const auto bw = kernel_bandwidths(z);
    REQUIRE(bw.size() == 5);
    CHECK(bw[2] == doctest::Approx(base).epsilon(1e-13));
    CHECK(bw[0] == doctest::Approx(base / 4).epsilon(1e-13));
    CHECK_THROWS_AS(multi_gaussian_kernel(z.topRows(1)), InputError);
}

TEST_CASE("lmmd: zero on identical weighted samples") {
    std::mt19937_64 rng(6);
    const Matrix f = random_matrix(6, 4, rng);
    Matrix y = Matrix::Zero(6, 3);
    for (int i = 0; i < 6; ++i) y(i, i % 3) = 1.0;
    const double v = lmmd(f, y, f, y);
    CHECK(std::abs(v) < 1e-9);
}

TEST_CASE("lmmd reduces to global mmd when one class carries all mass") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        std::mt19937_64 rng(seed);
        const Matrix fs = random_matrix(5, 4, rng);
        const Matrix ft = random_matrix(7, 4, rng, 1.5);
        Matrix ys = Matrix::Zero(5, 3);
        Matrix pt = Matrix::Zero(7, 3);
        ys.col(1).setOnes();
        pt.col(1).setOnes();
        CHECK(std::abs(lmmd(fs, ys, ft, pt) - mmd_global(fs, ft)) < 1e-10);
    }
}

TEST_CASE("lmmd matches the brute-force triple-loop oracle") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        std::mt19937_64 rng(100 + seed);
        const Matrix fs = random_matrix(3, 4, rng);
        const Matrix ft = random_matrix(3, 4, rng);
        Matrix ys = Matrix::Zero(3, 2);
        ys(0, 0) = ys(1, 1) = ys(2, seed % 2) = 1.0;
        const Matrix pt = random_probs(3, 2, rng);
        const double fast = lmmd(fs, ys, ft, pt);
        CHECK(std::abs(fast - oracle_lmmd(fs, ys, ft, pt)) < 1e-12);
        CHECK(fast >= -1e-9);
    }
}

TEST_CASE("lmmd skips classes absent from either batch") {
    std::mt19937_64 rng(7);
    const Matrix fs = random_matrix(4, 3, rng);
    const Matrix ft = random_matrix(4, 3, rng);
    Matrix ys = Matrix::Zero(4, 5);
    ys.col(0).setOnes();
    Matrix pt = Matrix::Zero(4, 5);
    pt.col(3).setOnes();
    CHECK(lmmd(fs, ys, ft, pt) == 0.0);
    CHECK_THROWS_AS(lmmd(fs, ys, ft.leftCols(2), pt), InputError);

    // Soft mass alone does not make a class present in the target batch.
    Matrix soft = Matrix::Constant(4, 5, 0.1);
    soft.col(3).setConstant(0.6);
    CHECK(lmmd(fs, ys, ft, soft) == 0.0);
    soft(2, 0) = 0.7;
    soft(2, 3) = 0.0;
    CHECK(lmmd(fs, ys, ft, soft) > 0.0);
}

TEST_CASE("global mmd properties") {
    std::mt19937_64 rng(8);
    const Matrix a = random_matrix(5, 3, rng);
    const Matrix b = random_matrix(6, 3, rng, 2.0);
    CHECK(std::abs(mmd_global(a, a)) < 1e-9);
    CHECK(mmd_global(a, b) == mmd_global(b, a));

    // Two tight clusters of m points each at distance delta: the bandwidth
    // adapts, base = m delta / (2m - 1), so the cross kernel stays finite:
    // mmd = 2 * 5 - 2 * sum_i exp(-(2m-1)/m * 2^(2-i)).
    const int m = 4;
    Matrix s = Matrix::Zero(m, 2);
    Matrix t = Matrix::Zero(m, 2);
    t.col(0).setConstant(1e3);
    double cross = 0.0;
    for (int i = 0; i < 5; ++i) cross += std::exp(-(2.0 * m - 1) / m * std::pow(2.0, 2 - i));
    CHECK(mmd_global(s, t) == doctest::Approx(10.0 - 2.0 * cross).epsilon(1e-12));
}

TEST_CASE("coral distance") {
    std::mt19937_64 rng(9);
    const Matrix a = random_matrix(4, 3, rng);
    CHECK(coral_distance(a, a) == 0.0);
    const Matrix shifted = (a.array() + 2.5).matrix();
    CHECK(coral_distance(a, shifted) < 1e-24);

    const Matrix b = random_matrix(4, 3, rng);
    auto cov = [](const Matrix& x) {
        Matrix c = Matrix::Zero(3, 3);
        for (int p = 0; p < 3; ++p)
            for (int q = 0; q < 3; ++q) {
                double mp = 0, mq = 0;
                for (int i = 0; i < 4; ++i) mp += x(i, p) / 4, mq += x(i, q) / 4;
                for (int i = 0; i < 4; ++i) c(p, q) += (x(i, p) - mp) * (x(i, q) - mq) / 3;
            }
        return c;
    };
    double expected = 0.0;
    const Matrix ca = cov(a), cb = cov(b);
    for (int p = 0; p < 3; ++p)
        for (int q = 0; q < 3; ++q) expected += std::pow(ca(p, q) - cb(p, q), 2);
    expected /= 4.0 * 9.0;
    CHECK(coral_distance(a, b) == doctest::Approx(expected).epsilon(1e-13));
    CHECK_THROWS_AS(coral_distance(a.topRows(1), b), InputError);
}

TEST_CASE("transfer loss gradients match finite differences") {
    std::mt19937_64 rng(10);
    const Matrix fs = random_matrix(4, 3, rng);
    const Matrix ft = random_matrix(5, 3, rng, 1.3);
    Matrix ys = Matrix::Zero(4, 3);
    ys(0, 0) = ys(1, 1) = ys(2, 1) = ys(3, 2) = 1.0;
    const Matrix pt = random_probs(5, 3, rng);

    TransferGrad g;
    lmmd(fs, ys, ft, pt, {}, &g);
    CHECK(rel_err(g.d_source, finite_difference(fs, [&](const Matrix& x) { return lmmd(x, ys, ft, pt); })) < 1e-7);
    CHECK(rel_err(g.d_target, finite_difference(ft, [&](const Matrix& x) { return lmmd(fs, ys, x, pt); })) < 1e-7);
    CHECK(rel_err(g.d_probs, finite_difference(pt, [&](const Matrix& x) { return lmmd(fs, ys, ft, x); })) < 1e-7);

    mmd_global(fs, ft, {}, &g);
    CHECK(rel_err(g.d_source, finite_difference(fs, [&](const Matrix& x) { return mmd_global(x, ft); })) < 1e-7);
    CHECK(rel_err(g.d_target, finite_difference(ft, [&](const Matrix& x) { return mmd_global(fs, x); })) < 1e-7);

    coral_distance(fs, ft, &g);
    CHECK(rel_err(g.d_source, finite_difference(fs, [&](const Matrix& x) { return coral_distance(x, ft); })) < 1e-7);
    CHECK(rel_err(g.d_target, finite_difference(ft, [&](const Matrix& x) { return coral_distance(fs, x); })) < 1e-7);
}

TEST_CASE("total loss is the weighted sum") {
    CHECK(total_loss(0.1, 0.2, 0.3, {1, 0, 0}) == 0.1);
    CHECK(total_loss(0.1, 0.2, 0.3, {1, 1, 1}) == doctest::Approx(0.6).epsilon(1e-15));
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    for (int k = 0; k < 50; ++k) {
        const double lr = u(rng), lc = u(rng), lt = u(rng);
        const LossWeights w{u(rng), u(rng), u(rng)};
        const double base = total_loss(lr, lc, lt, w);
        LossWeights doubled = w;
        doubled.lambda_t *= 2;
        CHECK(total_loss(lr, lc, lt, doubled) - base == doctest::Approx(w.lambda_t * lt).epsilon(1e-12));
    }
    CHECK_THROWS_AS((LossWeights{1, -1, 0}.validate()), InputError);
}
