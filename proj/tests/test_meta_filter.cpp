#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "guitraj/error.hpp"
#include "guitraj/meta_filter.hpp"
#include "guitraj/rng.hpp"

using namespace guitraj;
using namespace guitraj::meta;

namespace {

video_metadata vm(std::string id, std::string title, std::string desc = "") {
    video_metadata m;
    m.video_id = std::move(id);
    m.title = std::move(title);
    m.description = std::move(desc);
    m.duration = 100;
    return m;
}

labeled_metadata lm(std::string id, std::string title, int label) { return {vm(std::move(id), std::move(title)), label, {}}; }

// Independent reference: plain loop with the same clipping.
double ce_reference(const std::vector<double>& p, const std::vector<int>& y) {
    long double sum = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const long double q = std::min<long double>(std::max<long double>(p[i], 1e-12L), 1.0L - 1e-12L);
        sum += y[i] ? std::log(q) : std::log1p(-q);
    }
    return static_cast<double>(-sum / static_cast<long double>(p.size()));
}

}  // namespace

TEST_CASE("ce_loss hand values") {
    CHECK(ce_loss(std::vector<double>{0.5, 0.5}, std::vector<int>{1, 0}) == doctest::Approx(0.6931471805599453).epsilon(1e-15));
    CHECK(ce_loss(std::vector<double>{0.9, 0.2}, std::vector<int>{1, 0}) == doctest::Approx(0.164252033486018).epsilon(1e-14));
    CHECK(ce_loss(std::vector<double>{1 - 1e-12}, std::vector<int>{1}) <= 1e-11);
    CHECK(ce_loss(std::vector<double>{0.0}, std::vector<int>{0}) <= 1e-11);
    CHECK(std::isfinite(ce_loss(std::vector<double>{0.0}, std::vector<int>{1})));
}

TEST_CASE("ce_loss matches a reference on random instances and is non-negative") {
    rng gen(3);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = 1 + gen.below(8);
        std::vector<double> p(n);
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            p[i] = gen.unit();
            y[i] = static_cast<int>(gen.below(2));
        }
        const double v = ce_loss(p, y);
        CHECK(v >= 0);
        CHECK(std::fabs(v - ce_reference(p, y)) <= 1e-9);
    }
}

TEST_CASE("ce_loss errors") {
    auto code = [](auto fn) {
        try {
            fn();
        } catch (const error& e) {
            return e.code();
        }
        return errc::invalid_argument;
    };
    CHECK(code([] { ce_loss(std::vector<double>{0.5}, std::vector<int>{1, 0}); }) == errc::length_mismatch);
    CHECK(code([] { ce_loss(std::vector<double>{}, std::vector<int>{}); }) == errc::empty_input);
}

TEST_CASE("logistic gradient matches central differences") {
    rng gen(5);
    for (int trial = 0; trial < 30; ++trial) {
        const std::uint32_t dims = 8;
        linear_classifier model;
        model.weights.resize(dims);
        for (auto& w : model.weights) w = gen.unit() * 2 - 1;
        model.bias = gen.unit() - 0.5;
        std::vector<example> batch;
        for (int i = 0; i < 5; ++i) {
            example ex;
            ex.x.dims = dims;
            double norm = 0;
            for (std::uint32_t d = 0; d < dims; ++d) {
                if (gen.below(2)) {
                    ex.x.entries.push_back({d, gen.unit() + 0.1});
                    norm += ex.x.entries.back().second * ex.x.entries.back().second;
                }
            }
            for (auto& e : ex.x.entries) e.second /= std::sqrt(norm > 0 ? norm : 1);
            ex.label = static_cast<int>(gen.below(2));
            batch.push_back(ex);
        }
        std::vector<double> gw;
        double gb = 0;
        logistic_gradient(model, batch, gw, gb);
        const double h = 1e-5;
        auto rel_ok = [](double analytic, double numeric) {
            return std::fabs(analytic - numeric) <= 1e-6 * std::max(1.0, std::fabs(numeric));
        };
        for (std::uint32_t d = 0; d < dims; ++d) {
            auto plus = model, minus = model;
            plus.weights[d] += h;
            minus.weights[d] -= h;
            const double numeric = (logistic_loss(plus, batch) - logistic_loss(minus, batch)) / (2 * h);
            CHECK(rel_ok(gw[d], numeric));
        }
        auto plus = model, minus = model;
        plus.bias += h;
        minus.bias -= h;
        CHECK(rel_ok(gb, (logistic_loss(plus, batch) - logistic_loss(minus, batch)) / (2 * h)));
    }
}

TEST_CASE("featurize") {
    CHECK(featurize(video_metadata{}).entries.empty());
    const auto a = featurize(vm("a", "Excel tutorial"));
    const auto b = featurize(vm("b", "", "Excel tutorial"));
    CHECK(a == featurize(vm("a", "Excel tutorial")));
    std::set<std::uint32_t> ia, ib;
    for (auto [i, _] : a.entries) ia.insert(i);
    for (auto [i, _] : b.entries) ib.insert(i);
    CHECK(ia != ib);
    double norm = 0;
    for (auto [i, w] : a.entries) {
        CHECK(i < a.dims);
        norm += w * w;
    }
    CHECK(norm == doctest::Approx(1.0));
    CHECK(std::is_sorted(a.entries.begin(), a.entries.end()));
}

TEST_CASE("upsample_balance") {
    std::vector<labeled_metadata> data = {lm("p", "pos", 1), lm("n1", "a", 0), lm("n2", "b", 0), lm("n3", "c", 0)};
    auto out = upsample_balance(data, 1);
    std::map<std::string, int> count;
    int pos = 0, neg = 0;
    for (const auto& d : out) {
        ++count[d.meta.video_id];
        (d.label ? pos : neg)++;
    }
    CHECK(pos == 3);
    CHECK(neg == 3);
    CHECK(count["p"] == 3);
    for (const char* id : {"n1", "n2", "n3"}) CHECK(count[id] == 1);

    std::vector<labeled_metadata> big;
    for (int i = 0; i < 400; ++i) big.push_back(lm("p" + std::to_string(i), "t", 1));
    for (int i = 0; i < 9600; ++i) big.push_back(lm("n" + std::to_string(i), "t", 0));
    out = upsample_balance(big, 2);
    pos = neg = 0;
    std::map<std::string, int> reps;
    for (const auto& d : out) {
        (d.label ? pos : neg)++;
        if (d.label) ++reps[d.meta.video_id];
    }
    CHECK(pos == 9600);
    CHECK(neg == 9600);
    CHECK(reps.size() == 400);
    for (const auto& [_, r] : reps) CHECK(r == 24);

    std::vector<labeled_metadata> even = {lm("a", "x", 1), lm("b", "y", 0)};
    CHECK(upsample_balance(even, 3).size() == 2);
    try {
        upsample_balance({lm("a", "x", 1)}, 0);
        FAIL("expected ONE_CLASS_ONLY");
    } catch (const error& e) {
        CHECK(e.code() == errc::one_class_only);
    }
}

TEST_CASE("training on a separable toy set") {
    std::vector<labeled_metadata> data;
    for (int i = 0; i < 10; ++i) data.push_back(lm("p" + std::to_string(i), "excel tutorial lesson " + std::to_string(i), 1));
    for (int i = 0; i < 10; ++i) data.push_back(lm("n" + std::to_string(i), "beach vlog holiday " + std::to_string(i), 0));
    train_config tc;
    tc.epochs = 20;
    tc.learning_rate = 0.5;
    tc.batch_size = 4;
    tc.seed = 9;
    std::vector<epoch_report> history;
    const auto model = train_classifier(data, tc, 1u << 12, &history);
    REQUIRE(history.size() == 20);
    for (std::size_t i = 1; i < history.size(); ++i) CHECK(history[i].loss < history[i - 1].loss);
    for (const auto& d : data) CHECK(classify(d.meta, model).pass == (d.label == 1));
    CHECK(train_classifier(data, tc, 1u << 12) == model);
    try {
        train_classifier({}, tc);
        FAIL("expected EMPTY_INPUT");
    } catch (const error& e) {
        CHECK(e.code() == errc::empty_input);
    }
}

TEST_CASE("classify threshold is inclusive and monotone") {
    linear_classifier zero;
    zero.weights.assign(16, 0.0);
    const auto m = vm("x", "anything");
    const auto d = classify(m, zero, 0.5);
    CHECK(d.probability == 0.5);
    CHECK(d.pass);
    CHECK_FALSE(classify(m, zero, 0.51).pass);
    linear_classifier biased = zero;
    biased.bias = 0.3;
    bool was_fail = false;
    for (double th = 0; th <= 1.0; th += 0.01) {
        const bool pass = classify(m, biased, th).pass;
        if (was_fail) CHECK_FALSE(pass);
        was_fail = was_fail || !pass;
    }
}

TEST_CASE("checkpoint round trip") {
    linear_classifier model;
    model.weights = {0.0, -1.5, 3.25e-300, 1e300, -0.0};
    model.bias = 0.125;
    model.training = {3, 2e-5, 32, 42};
    const auto back = checkpoint_from_json(json::parse(checkpoint_to_json(model).dump()));
    CHECK(back == model);
    CHECK(base64_decode(base64_encode(std::vector<std::uint8_t>{1, 2, 3, 250})) == std::vector<std::uint8_t>{1, 2, 3, 250});
}

TEST_CASE("filter_stream counts, quarantine and order") {
    const fs::path dir = fs::temp_directory_path() / "guitraj_filter_stream";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::string lines;
    for (int i = 0; i < 10; ++i) lines += to_json(vm("v" + std::to_string(i), i < 4 ? "keep" : "drop")).dump() + "\n";
    write_file_atomic(dir / "in.jsonl", lines);
    decider d = [](const video_metadata& m) { return m.title == "keep" ? 0.9 : 0.1; };
    auto out = default_outputs(dir / "out");
    fs::create_directories(dir / "out");
    CHECK(filter_stream(dir / "in.jsonl", d, 0.5, out, 3) == stream_counts{10, 4, 6, 0});
    const auto passed = read_lines(out.passed);
    REQUIRE(passed.size() == 4);
    for (int i = 0; i < 4; ++i) CHECK(json::parse(passed[i])["video_id"] == "v" + std::to_string(i));

    write_file_atomic(dir / "bad.jsonl", to_json(vm("a", "keep")).dump() + "\n{oops\n" + to_json(vm("b", "drop")).dump() +
                                             "\n" + to_json(vm("c", "keep")).dump() + "\n" + to_json(vm("a", "keep")).dump() + "\n");
    auto counts = filter_stream(dir / "bad.jsonl", d, 0.5, out);
    CHECK(counts.read == 5);
    CHECK(counts.malformed == 2);
    CHECK(counts.passed + counts.failed + counts.malformed == counts.read);

    write_file_atomic(dir / "empty.jsonl", "");
    CHECK(filter_stream(dir / "empty.jsonl", d, 0.5, out) == stream_counts{});
    CHECK(json::parse(read_file(out.manifest))["counts"]["read"] == 0);
    fs::remove_all(dir);
}

TEST_CASE("remote classifier responses") {
    CHECK(parse_classify_response(R"({"is_gui_content": true, "confidence": 0.95, "reasoning": "x"})") == doctest::Approx(0.95));
    CHECK(parse_classify_response("Sure:\n{\"is_gui_content\": false, \"confidence\": 0.8}") == doctest::Approx(0.2));
    for (const char* bad : {"{}", R"({"is_gui_content": "yes", "confidence": 0.5})", R"({"is_gui_content": true, "confidence": 1.5})", "nope"}) {
        CAPTURE(bad);
        try {
            parse_classify_response(bad);
            FAIL("expected PARSE_ERROR");
        } catch (const error& e) {
            CHECK(e.code() == errc::parse_error);
        }
    }
    const auto req = build_classify_request(vm("v", "How to use Excel"));
    CHECK(req.target == backend::stage::classify);
    CHECK(req.prompt.find("How to use Excel") != std::string::npos);
}
