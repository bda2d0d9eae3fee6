#include "guitraj/meta_filter.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <map>
#include <set>

#include "guitraj/error.hpp"
#include "guitraj/hash.hpp"
#include "guitraj/parallel.hpp"
#include "guitraj/prompts.hpp"
#include "guitraj/text_json.hpp"
#include "guitraj/rng.hpp"

namespace guitraj::meta {
namespace {

void add_tokens(std::string_view field, std::string_view text, std::uint32_t dims, std::map<std::uint32_t, double>& counts) {
    std::string token;
    auto flush = [&] {
        if (token.empty()) return;
        std::string key(field);
        key += ':';
        key += token;
        counts[static_cast<std::uint32_t>(fnv1a64(key) % dims)] += 1.0;
        token.clear();
    };
    for (unsigned char c : text) {
        if (std::isalnum(c) || c >= 0x80) {
            token.push_back(static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c));
        } else {
            flush();
        }
    }
    flush();
}

double dot(const linear_classifier& model, const feature_vector& x) {
    double z = model.bias;
    for (const auto& [i, v] : x.entries) z += model.weights[i] * v;
    return z;
}

std::vector<example> to_examples(const std::vector<labeled_metadata>& data, std::uint32_t dims) {
    std::vector<example> out;
    out.reserve(data.size());
    for (const auto& d : data) out.push_back({featurize(d.meta, dims), d.label});
    return out;
}

void check_classes(const std::vector<labeled_metadata>& data) {
    if (data.empty()) throw error(errc::empty_input, "no labeled samples");
    std::size_t pos = 0;
    for (const auto& d : data) {
        if (d.label != 0 && d.label != 1) throw error(errc::invalid_argument, "label must be 0 or 1");
        pos += d.label == 1;
    }
    if (pos == 0 || pos == data.size()) throw error(errc::one_class_only, "both classes are required");
}

}  // namespace

json to_json(const labeled_metadata& l) {
    json j = guitraj::to_json(l.meta);
    j["label"] = l.label;
    j["rationale"] = l.rationale ? json(*l.rationale) : json(nullptr);
    return j;
}

labeled_metadata labeled_metadata_from_json(const json& j) {
    labeled_metadata l;
    l.meta = video_metadata_from_json(j);
    auto it = j.find("label");
    if (it == j.end()) throw error(errc::json_schema_error, "missing label", "label");
    if (it->is_boolean()) {
        l.label = it->get<bool>() ? 1 : 0;
    } else if (it->is_number_integer() && (it->get<int>() == 0 || it->get<int>() == 1)) {
        l.label = it->get<int>();
    } else {
        throw error(errc::json_schema_error, "label must be 0/1 or boolean", "label");
    }
    if (auto r = j.find("rationale"); r != j.end() && r->is_string()) l.rationale = r->get<std::string>();
    return l;
}

feature_vector featurize(const video_metadata& meta, std::uint32_t dims) {
    if (dims == 0) throw error(errc::invalid_argument, "feature dimensionality must be positive");
    std::map<std::uint32_t, double> counts;
    add_tokens("title", meta.title, dims, counts);
    add_tokens("description", meta.description, dims, counts);
    for (const auto& k : meta.keywords) add_tokens("keywords", k, dims, counts);
    add_tokens("channel", meta.channel, dims, counts);
    add_tokens("category", meta.category, dims, counts);
    if (meta.subtitles) add_tokens("subtitles", *meta.subtitles, dims, counts);

    feature_vector fv;
    fv.dims = dims;
    double norm = 0;
    for (const auto& [i, c] : counts) norm += c * c;
    norm = std::sqrt(norm);
    for (const auto& [i, c] : counts) fv.entries.emplace_back(i, c / norm);
    return fv;
}

double sigmoid(double z) noexcept {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double score(const linear_classifier& model, const feature_vector& x) {
    if (model.weights.size() != x.dims) throw error(errc::invalid_argument, "feature/model dimensionality mismatch");
    return sigmoid(dot(model, x));
}

std::vector<labeled_metadata> upsample_balance(const std::vector<labeled_metadata>& data, std::uint64_t seed) {
    check_classes(data);
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < data.size(); ++i) (data[i].label == 1 ? pos : neg).push_back(i);
    std::vector<labeled_metadata> out = data;
    auto& minority = pos.size() < neg.size() ? pos : neg;
    const std::size_t target = std::max(pos.size(), neg.size());
    std::vector<std::size_t> order = minority;
    rng gen(seed);
    gen.shuffle(order);
    for (std::size_t k = 0; minority.size() + k < target; ++k) out.push_back(data[order[k % order.size()]]);
    return out;
}

double ce_loss(std::span<const double> predictions, std::span<const int> labels) {
    if (predictions.size() != labels.size()) throw error(errc::length_mismatch, "predictions and labels differ in length");
    if (predictions.empty()) throw error(errc::empty_input, "no predictions");
    double sum = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const double p = std::clamp(predictions[i], prob_epsilon, 1.0 - prob_epsilon);
        const int y = labels[i];
        if (y != 0 && y != 1) throw error(errc::invalid_argument, "labels must be 0 or 1");
        sum += y * std::log(p) + (1 - y) * std::log(1.0 - p);
    }
    return -sum / static_cast<double>(predictions.size());
}

double logistic_loss(const linear_classifier& model, std::span<const example> batch) {
    std::vector<double> p;
    std::vector<int> y;
    p.reserve(batch.size());
    y.reserve(batch.size());
    for (const auto& ex : batch) {
        p.push_back(score(model, ex.x));
        y.push_back(ex.label);
    }
    return ce_loss(p, y);
}

void logistic_gradient(const linear_classifier& model, std::span<const example> batch, std::vector<double>& grad_w,
                       double& grad_b) {
    if (batch.empty()) throw error(errc::empty_input, "empty batch");
    grad_w.assign(model.weights.size(), 0.0);
    grad_b = 0;
    const double inv = 1.0 / static_cast<double>(batch.size());
    for (const auto& ex : batch) {
        const double r = (score(model, ex.x) - ex.label) * inv;
        for (const auto& [i, v] : ex.x.entries) grad_w[i] += r * v;
        grad_b += r;
    }
}

linear_classifier train_classifier(const std::vector<labeled_metadata>& data, const train_config& config,
                                   std::uint32_t dims, std::vector<epoch_report>* history) {
    check_classes(data);
    if (config.batch_size == 0 || config.epochs < 0) throw error(errc::invalid_argument, "bad training config");
    const auto examples = to_examples(data, dims);
    linear_classifier model;
    model.weights.assign(dims, 0.0);
    model.training = config;

    std::vector<std::size_t> order(examples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng gen(config.seed);
    std::vector<double> residual;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        gen.shuffle(order);
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t stop = std::min(order.size(), start + config.batch_size);
            const double inv = 1.0 / static_cast<double>(stop - start);
            // Residuals use pre-step weights for the whole batch.
            residual.clear();
            for (std::size_t k = start; k < stop; ++k) {
                const auto& ex = examples[order[k]];
                residual.push_back((sigmoid(dot(model, ex.x)) - ex.label) * inv);
            }
            double grad_b = 0;
            for (std::size_t k = start; k < stop; ++k) {
                const double r = residual[k - start];
                for (const auto& [i, v] : examples[order[k]].x.entries) model.weights[i] -= config.learning_rate * r * v;
                grad_b += r;
            }
            model.bias -= config.learning_rate * grad_b;
        }
        if (history) history->push_back({epoch + 1, logistic_loss(model, examples)});
    }
    return model;
}

decision classify(const video_metadata& meta, const linear_classifier& model, double threshold) {
    const double p = score(model, featurize(meta, static_cast<std::uint32_t>(model.weights.size())));
    return {p, p >= threshold};
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
    std::string out(4 * ((bytes.size() + 2) / 3), '\0');
    const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                  static_cast<int>(bytes.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
    if (text.size() % 4 != 0) throw error(errc::parse_error, "base64 length not a multiple of 4");
    std::vector<std::uint8_t> out(3 * text.size() / 4);
    const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                                  static_cast<int>(text.size()));
    if (n < 0) throw error(errc::parse_error, "invalid base64");
    std::size_t pad = 0;
    if (!text.empty() && text.back() == '=') ++pad;
    if (text.size() > 1 && text[text.size() - 2] == '=') ++pad;
    out.resize(static_cast<std::size_t>(n) - pad);
    return out;
}

json checkpoint_to_json(const linear_classifier& model) {
    std::vector<std::uint8_t> bytes(model.weights.size() * 8);
    for (std::size_t i = 0; i < model.weights.size(); ++i) {
        const auto bits = std::bit_cast<std::uint64_t>(model.weights[i]);
        for (int b = 0; b < 8; ++b) bytes[i * 8 + b] = static_cast<std::uint8_t>(bits >> (8 * b));
    }
    return {{"format", "guitraj-linear-v1"},
            {"dims", model.weights.size()},
            {"bias", model.bias},
            {"weights", base64_encode(bytes)},
            {"config",
             {{"epochs", model.training.epochs},
              {"learning_rate", model.training.learning_rate},
              {"batch_size", model.training.batch_size},
              {"seed", model.training.seed}}}};
}

linear_classifier checkpoint_from_json(const json& j) {
    try {
        if (j.at("format") != "guitraj-linear-v1") throw error(errc::parse_error, "unknown checkpoint format");
        linear_classifier model;
        const auto dims = j.at("dims").get<std::size_t>();
        const auto bytes = base64_decode(j.at("weights").get<std::string>());
        if (bytes.size() != dims * 8) throw error(errc::parse_error, "weight payload does not match dims");
        model.weights.resize(dims);
        for (std::size_t i = 0; i < dims; ++i) {
            std::uint64_t bits = 0;
            for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[i * 8 + b]) << (8 * b);
            model.weights[i] = std::bit_cast<double>(bits);
            if (!std::isfinite(model.weights[i])) throw error(errc::parse_error, "non-finite weight");
        }
        model.bias = j.at("bias").get<double>();
        const auto& c = j.at("config");
        model.training = {c.at("epochs").get<int>(), c.at("learning_rate").get<double>(),
                          c.at("batch_size").get<std::size_t>(), c.at("seed").get<std::uint64_t>()};
        return model;
    } catch (const json::exception& e) {
        throw error(errc::parse_error, std::string("checkpoint: ") + e.what());
    }
}

std::vector<parsed_line> parse_metadata_lines(const std::vector<std::string>& lines) {
    std::vector<parsed_line> out;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].find_first_not_of(" \t") == std::string::npos) continue;
        parsed_line pl;
        pl.line_no = i + 1;
        pl.raw = lines[i];
        auto j = json::parse(lines[i], nullptr, false);
        if (j.is_discarded()) {
            pl.error = "PARSE_ERROR: invalid JSON";
        } else {
            try {
                auto meta = video_metadata_from_json(j);
                if (!seen.insert(meta.video_id).second) {
                    pl.error = "DUPLICATE_ID: " + meta.video_id;
                } else {
                    pl.meta = std::move(meta);
                }
            } catch (const error& e) {
                pl.error = e.what();
            }
        }
        out.push_back(std::move(pl));
    }
    return out;
}

stream_outputs default_outputs(const fs::path& out_dir) {
    return {out_dir / "passed.jsonl", out_dir / "decisions.jsonl", out_dir / "quarantine.jsonl",
            out_dir / "manifest.json"};
}

stream_counts filter_stream(const fs::path& input, const decider& decide, double threshold,
                            const stream_outputs& out, std::size_t concurrency) {
    const auto parsed = parse_metadata_lines(read_lines(input));
    std::vector<std::optional<double>> probs(parsed.size());
    parallel_for(parsed.size(), concurrency, [&](std::size_t i) {
        if (parsed[i].meta) probs[i] = decide(*parsed[i].meta);
    });

    stream_counts counts;
    std::vector<json> passed, decisions, quarantine;
    for (std::size_t i = 0; i < parsed.size(); ++i) {
        ++counts.read;
        if (!parsed[i].meta) {
            ++counts.malformed;
            quarantine.push_back({{"line", parsed[i].line_no}, {"error", parsed[i].error}, {"raw", parsed[i].raw}});
            continue;
        }
        const bool pass = *probs[i] >= threshold;
        decisions.push_back({{"video_id", parsed[i].meta->video_id}, {"probability", *probs[i]}, {"pass", pass}});
        if (pass) {
            ++counts.passed;
            passed.push_back(guitraj::to_json(*parsed[i].meta));
        } else {
            ++counts.failed;
        }
    }
    write_file_atomic(out.passed, to_jsonl(passed));
    write_file_atomic(out.decisions, to_jsonl(decisions));
    write_file_atomic(out.quarantine, to_jsonl(quarantine));
    const json manifest = {{"stage", "filter-meta"},
                           {"input", input.string()},
                           {"threshold", threshold},
                           {"counts",
                            {{"read", counts.read},
                             {"passed", counts.passed},
                             {"failed", counts.failed},
                             {"malformed", counts.malformed}}}};
    write_file_atomic(out.manifest, manifest.dump(2) + "\n");
    return counts;
}

backend::request build_classify_request(const video_metadata& meta) {
    json input = {{"Title", meta.title}, {"Description", meta.description}, {"Tags", meta.keywords},
                  {"Channel", meta.channel}};
    if (!meta.category.empty()) input["Category"] = meta.category;
    backend::request r;
    r.target = backend::stage::classify;
    r.prompt = std::string(prompts::classify_metadata) + "\n\nInput:\n" + input.dump(2);
    r.context = guitraj::to_json(meta).dump();
    return r;
}

double parse_classify_response(std::string_view text) {
    auto found = find_json(text, '{');
    if (!found) throw error(errc::parse_error, "no JSON object in classifier response");
    const json& j = found->value;
    auto gui = j.find("is_gui_content");
    if (gui == j.end() || !gui->is_boolean()) throw error(errc::parse_error, "is_gui_content must be a boolean");
    double confidence = 0;
    auto c = j.find("confidence");
    if (c == j.end() || !json_to_double(*c, confidence) || confidence < 0 || confidence > 1) {
        throw error(errc::parse_error, "confidence must be a number in [0,1]");
    }
    return gui->get<bool>() ? confidence : 1.0 - confidence;
}

decider remote_decider(backend::client& client) {
    return [&client](const video_metadata& meta) { return parse_classify_response(client.call(build_classify_request(meta))); };
}

}  // namespace guitraj::meta
