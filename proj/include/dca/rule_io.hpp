#pragma once

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "dca/alphabet.hpp"
#include "dca/binary.hpp"
#include "dca/errors.hpp"
#include "dca/rule_table.hpp"

namespace dca {

// Rule files are line-oriented text:
//
//   dca-rule/1
//   alphabet: 0 1
//   offsets: -1 0 1
//   parameterization: softmax        (or sigmoid)
//   deterministic: false
//   weights:
//   <one line per pattern code; k values for softmax, one for sigmoid>
//
// Deterministic rules replace the weights section with
//
//   outputs: <one symbol label per pattern code>
//
// and load as exact 0/1 distributions, which is the only representation
// that evolves bit-identically to the discrete rule. Weights print with 17
// significant digits and round-trip exactly.

inline std::string format_double(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

namespace detail {

inline constexpr const char* kRuleMagic = "dca-rule/1";

inline std::vector<std::string> split_tokens(const std::string& line) {
    std::vector<std::string> tokens;
    std::istringstream in(line);
    std::string token;
    while (in >> token) tokens.push_back(token);
    return tokens;
}

inline double parse_double(const std::string& token, std::size_t line) {
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(token, &used);
    } catch (const std::exception&) {
        throw ParseError("not a number: " + token, line);
    }
    if (used != token.size()) throw ParseError("not a number: " + token, line);
    return value;
}

inline bool all_delta_rows(const RuleTable& rule) {
    for (double p : rule.rho_flat())
        if (p != 0.0 && p != 1.0) return false;
    return true;
}

inline void write_header(std::ostream& out, const Alphabet& alphabet,
                         const std::vector<int>& offsets,
                         const std::string& parameterization, bool deterministic) {
    out << kRuleMagic << "\n";
    out << "alphabet:";
    for (const auto& label : alphabet.labels()) out << " " << label;
    out << "\noffsets:";
    for (int offset : offsets) out << " " << offset;
    out << "\nparameterization: " << parameterization << "\n";
    out << "deterministic: " << (deterministic ? "true" : "false") << "\n";
}

}  // namespace detail

inline void save_rule(const RuleTable& rule, const std::vector<int>& offsets,
                      std::ostream& out) {
    if (offsets.size() != rule.arity())
        throw std::invalid_argument("offset list does not match rule arity");
    if (rule.weight_backed()) {
        detail::write_header(out, rule.alphabet(), offsets, "softmax", false);
        out << "weights:\n";
        for (std::size_t code = 0; code < rule.pattern_count(); ++code) {
            for (std::size_t a = 0; a < rule.symbol_count(); ++a)
                out << (a ? " " : "") << format_double(rule.weight(code, a));
            out << "\n";
        }
        return;
    }
    if (!detail::all_delta_rows(rule))
        throw std::invalid_argument(
            "only weight-backed or deterministic rules can be saved");
    detail::write_header(out, rule.alphabet(), offsets, "softmax", true);
    const DiscreteRule discrete = rule.argmax_rule();
    out << "outputs:";
    for (std::size_t sym : discrete.outputs) out << " " << rule.alphabet().label(sym);
    out << "\n";
}

inline void save_rule(const BinaryRule& rule, const std::vector<int>& offsets,
                      std::ostream& out) {
    if (offsets.size() != rule.arity())
        throw std::invalid_argument("offset list does not match rule arity");
    const Alphabet alphabet = Alphabet::binary();
    if (rule.weight_backed()) {
        detail::write_header(out, alphabet, offsets, "sigmoid", false);
        out << "weights:\n";
        for (std::size_t code = 0; code < rule.pattern_count(); ++code)
            out << format_double(rule.weight(code)) << "\n";
        return;
    }
    for (double p : rule.probs())
        if (p != 0.0 && p != 1.0)
            throw std::invalid_argument(
                "only weight-backed or deterministic rules can be saved");
    detail::write_header(out, alphabet, offsets, "sigmoid", true);
    const DiscreteRule discrete = rule.thresholded();
    out << "outputs:";
    for (std::size_t sym : discrete.outputs) out << " " << alphabet.label(sym);
    out << "\n";
}

struct LoadedRule {
    std::vector<int> offsets;
    std::variant<RuleTable, BinaryRule> rule;

    bool is_binary() const { return std::holds_alternative<BinaryRule>(rule); }
    const RuleTable& table() const { return std::get<RuleTable>(rule); }
    const BinaryRule& binary() const { return std::get<BinaryRule>(rule); }
};

inline LoadedRule load_rule(std::istream& in) {
    std::size_t line_no = 0;
    std::string line;
    auto next_line = [&]() -> std::string& {
        if (!std::getline(in, line)) throw ParseError("unexpected end of file", line_no);
        ++line_no;
        return line;
    };
    auto expect_key = [&](const std::string& key) -> std::vector<std::string> {
        auto tokens = detail::split_tokens(next_line());
        if (tokens.empty() || tokens.front() != key + ":")
            throw ParseError("expected '" + key + ":'", line_no);
        tokens.erase(tokens.begin());
        return tokens;
    };

    if (next_line() != detail::kRuleMagic)
        throw ParseError(std::string("expected '") + detail::kRuleMagic + "'", line_no);

    auto labels = expect_key("alphabet");
    if (labels.size() < 2) throw ParseError("alphabet needs at least two symbols", line_no);
    Alphabet alphabet(labels);

    auto offset_tokens = expect_key("offsets");
    if (offset_tokens.empty()) throw ParseError("offsets must not be empty", line_no);
    std::vector<int> offsets;
    for (const auto& token : offset_tokens)
        offsets.push_back(static_cast<int>(detail::parse_double(token, line_no)));

    auto param_tokens = expect_key("parameterization");
    if (param_tokens.size() != 1)
        throw ParseError("parameterization takes one tag", line_no);
    const std::string parameterization = param_tokens.front();
    if (parameterization != "softmax" && parameterization != "sigmoid")
        throw ParseError("unknown parameterization tag: " + parameterization, line_no);
    if (parameterization == "sigmoid" && alphabet.size() != 2)
        throw ParseError("sigmoid parameterization needs a two-symbol alphabet", line_no);

    auto det_tokens = expect_key("deterministic");
    if (det_tokens.size() != 1 ||
        (det_tokens.front() != "true" && det_tokens.front() != "false"))
        throw ParseError("deterministic must be true or false", line_no);
    const bool deterministic = det_tokens.front() == "true";

    const std::size_t arity = offsets.size();
    const std::size_t patterns = pattern_count(alphabet.size(), arity);

    if (deterministic) {
        auto output_tokens = expect_key("outputs");
        if (output_tokens.size() != patterns)
            throw ParseError("expected " + std::to_string(patterns) + " outputs", line_no);
        std::vector<std::size_t> outputs;
        for (const auto& token : output_tokens) {
            if (!alphabet.contains(token))
                throw ParseError("unknown output symbol: " + token, line_no);
            outputs.push_back(alphabet.index_of(token));
        }
        DiscreteRule discrete(alphabet.size(), arity, std::move(outputs));
        if (parameterization == "sigmoid")
            return {offsets, BinaryRule::from_probs(
                                 arity, [&] {
                                     std::vector<double> probs(patterns);
                                     for (std::size_t c = 0; c < patterns; ++c)
                                         probs[c] = static_cast<double>(discrete.outputs[c]);
                                     return probs;
                                 }())};
        return {offsets, RuleTable::deterministic(alphabet, discrete)};
    }

    auto section = detail::split_tokens(next_line());
    if (section.size() != 1 || section.front() != "weights:")
        throw ParseError("expected 'weights:'", line_no);
    const std::size_t row_width = parameterization == "sigmoid" ? 1 : alphabet.size();
    std::vector<double> weights;
    weights.reserve(patterns * row_width);
    for (std::size_t code = 0; code < patterns; ++code) {
        auto tokens = detail::split_tokens(next_line());
        if (tokens.size() != row_width)
            throw ParseError("expected " + std::to_string(row_width) +
                                 " weights for pattern " + std::to_string(code),
                             line_no);
        for (const auto& token : tokens)
            weights.push_back(detail::parse_double(token, line_no));
    }

    if (parameterization == "sigmoid")
        return {offsets, BinaryRule::from_weights(arity, std::move(weights))};
    return {offsets, RuleTable(alphabet, arity, std::move(weights))};
}

}  // namespace dca
