#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "core.hpp"
#include "decide.hpp"
#include "lps.hpp"

namespace tvr::io {

using nlohmann::json;

namespace detail {

inline std::vector<std::string> split_words(const std::string& line)
{
    std::istringstream in(line);
    std::vector<std::string> words;
    std::string w;
    while (in >> w)
        words.push_back(w);
    return words;
}

inline Int parse_int(const std::string& token, std::size_t line)
{
    std::size_t start = (token[0] == '-' || token[0] == '+') ? 1 : 0;
    if (start == token.size() || token.find_first_not_of("0123456789", start) != std::string::npos)
        throw ParseError(line, "expected an integer, got '" + token + "'");
    return Int(token[0] == '+' ? token.substr(1) : token);
}

} // namespace detail

/// Text model format:
///
///     # comment
///     dim 2
///     states A B
///     trans t1 A add -3 4 A
///     trans t2 A tst B
///
/// An optional `vass` line forbids tests.
inline Tvass parse_model(const std::string& text)
{
    std::optional<std::size_t> dim;
    std::optional<std::vector<std::string>> states;
    std::vector<TransitionSpec> specs;
    std::unordered_set<std::string> declared, ids;
    bool testable = true;

    std::istringstream in(text);
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        if (auto hash = raw.find('#'); hash != std::string::npos)
            raw.erase(hash);
        const auto w = detail::split_words(raw);
        if (w.empty())
            continue;
        if (w[0] == "dim") {
            if (dim)
                throw ParseError(line, "duplicate dim line");
            if (w.size() != 2)
                throw ParseError(line, "dim takes one argument");
            const Int d = detail::parse_int(w[1], line);
            if (d < 1 || d > 64)
                throw ParseError(line, "dimension must lie in [1,64]");
            dim = static_cast<std::size_t>(d);
        } else if (w[0] == "vass") {
            if (w.size() != 1)
                throw ParseError(line, "vass takes no arguments");
            if (!specs.empty())
                throw ParseError(line, "vass must precede the transitions");
            testable = false;
        } else if (w[0] == "states") {
            if (w.size() < 2)
                throw ParseError(line, "states line declares no states");
            if (!states)
                states.emplace();
            for (std::size_t i = 1; i < w.size(); ++i) {
                if (!declared.insert(w[i]).second)
                    throw ParseError(line, "duplicate state '" + w[i] + "'");
                states->push_back(w[i]);
            }
        } else if (w[0] == "trans") {
            if (!dim)
                throw ParseError(line, "trans before dim");
            if (w.size() < 5)
                throw ParseError(line, "trans needs an id, a source, an action and a target");
            const std::string& id = w[1];
            const std::string& src = w[2];
            if (!ids.insert(id).second)
                throw ParseError(line, "duplicate transition id '" + id + "'");
            if (!declared.count(src))
                throw ParseError(line, "undeclared state '" + src + "'");
            const std::string& dst = w.back();
            if (!declared.count(dst))
                throw ParseError(line, "undeclared state '" + dst + "'");
            if (w[3] == "tst") {
                if (w.size() != 5)
                    throw ParseError(line, "tst takes no operands");
                if (!testable)
                    throw ParseError(line, "zero-test in a model declared vass");
                specs.push_back(TransitionSpec{id, src, Action::test(), dst});
            } else if (w[3] == "add") {
                if (w.size() != 5 + *dim)
                    throw ParseError(line, "add expects " + std::to_string(*dim) + " components, got " +
                                               std::to_string(w.size() - 5));
                IntVector delta(*dim);
                for (std::size_t i = 0; i < *dim; ++i)
                    delta[i] = detail::parse_int(w[4 + i], line);
                specs.push_back(TransitionSpec{id, src, Action::add(std::move(delta)), dst});
            } else {
                throw ParseError(line, "unknown action '" + w[3] + "'");
            }
        } else {
            throw ParseError(line, "unknown directive '" + w[0] + "'");
        }
    }
    if (!dim)
        throw ParseError(line, "missing dim line");
    if (!states)
        throw ParseError(line, "missing states line");
    try {
        return Tvass(*dim, *states, specs, testable);
    } catch (const ModelError& e) {
        throw ParseError(line, e.what());
    }
}

inline std::string print_model(const Tvass& model)
{
    std::ostringstream out;
    out << "dim " << model.dimension() << "\n";
    if (!model.testable())
        out << "vass\n";
    out << "states";
    for (const std::string& s : model.state_names())
        out << ' ' << s;
    out << "\n";
    for (const Transition& t : model.transitions()) {
        out << "trans " << t.name << ' ' << model.state_name(t.source);
        if (t.action.is_test()) {
            out << " tst";
        } else {
            out << " add";
            for (const Int& v : t.action.delta())
                out << ' ' << v;
        }
        out << ' ' << model.state_name(t.target) << "\n";
    }
    return out.str();
}

/// "STATE N1 … Nd"
inline Configuration parse_configuration(const Tvass& model, const std::string& text)
{
    const auto w = detail::split_words(text);
    if (w.size() != model.dimension() + 1)
        throw UsageError("configuration '" + text + "' needs a state and " + std::to_string(model.dimension()) +
                         " counters");
    IntVector counters(model.dimension());
    for (std::size_t i = 0; i < model.dimension(); ++i) {
        try {
            counters[i] = detail::parse_int(w[i + 1], 0);
        } catch (const ParseError&) {
            throw UsageError("counter '" + w[i + 1] + "' is not an integer");
        }
    }
    if (!counters.is_nonnegative())
        throw UsageError("counters must be nonnegative");
    auto q = model.find_state(w[0]);
    if (!q)
        throw UsageError("unknown state '" + w[0] + "'");
    return Configuration{*q, std::move(counters)};
}

namespace detail {

inline json names_of(const Tvass& model, const Trace& pi)
{
    json out = json::array();
    for (TransitionId t : pi)
        out.push_back(model.transition(t).name);
    return out;
}

inline Trace trace_of(const Tvass& model, const json& j)
{
    if (!j.is_array())
        throw CertificateError("expected an array of transition ids");
    Trace out;
    for (const json& e : j) {
        if (!e.is_string())
            throw CertificateError("transition ids must be strings");
        auto t = model.find_transition(e.get<std::string>());
        if (!t)
            throw CertificateError("unknown transition '" + e.get<std::string>() + "'");
        out.push_back(*t);
    }
    return out;
}

inline json int_json(const Int& v)
{
    if (v >= std::numeric_limits<std::int64_t>::min() && v <= std::numeric_limits<std::int64_t>::max())
        return static_cast<std::int64_t>(v);
    return v.str();
}

inline Int int_of(const json& j)
{
    if (j.is_number_integer())
        return Int(j.get<std::int64_t>());
    if (j.is_string()) {
        try {
            return parse_int(j.get<std::string>(), 0);
        } catch (const ParseError&) {
        }
    }
    throw CertificateError("expected an integer count");
}

} // namespace detail

/// {"type":"lps","segments":[{"path":[…]},{"cycle":[…],"count":N},…]}
inline json certificate_json(const Tvass& model, const CountedLps& cert)
{
    json segments = json::array();
    const LinearPathScheme& L = cert.scheme;
    for (std::size_t j = 0; j < L.alpha.size(); ++j) {
        if (j > 0)
            segments.push_back({{"cycle", detail::names_of(model, L.beta[j - 1])}, {"count", detail::int_json(cert.counts[j - 1])}});
        if (!L.alpha[j].empty())
            segments.push_back({{"path", detail::names_of(model, L.alpha[j])}});
    }
    return {{"type", "lps"}, {"segments", segments}};
}

inline json certificate_json(const Tvass& model, const Trace& pi)
{
    return {{"type", "trace"}, {"trace", detail::names_of(model, pi)}};
}

using ParsedCertificate = std::variant<Trace, CountedLps>;

inline ParsedCertificate parse_certificate(const Tvass& model, const json& j)
{
    if (!j.is_object() || !j.contains("type") || !j["type"].is_string())
        throw CertificateError("certificate needs a string field 'type'");
    const std::string type = j["type"].get<std::string>();
    if (type == "trace") {
        if (!j.contains("trace"))
            throw CertificateError("trace certificate needs a 'trace' array");
        return detail::trace_of(model, j["trace"]);
    }
    if (type != "lps")
        throw CertificateError("unknown certificate type '" + type + "'");
    if (!j.contains("segments") || !j["segments"].is_array())
        throw CertificateError("lps certificate needs a 'segments' array");
    CountedLps cert;
    cert.scheme.alpha.emplace_back();
    for (const json& seg : j["segments"]) {
        if (!seg.is_object())
            throw CertificateError("segments must be objects");
        if (seg.contains("path") && !seg.contains("cycle")) {
            Trace p = detail::trace_of(model, seg["path"]);
            cert.scheme.alpha.back().insert(cert.scheme.alpha.back().end(), p.begin(), p.end());
        } else if (seg.contains("cycle") && !seg.contains("path")) {
            if (!seg.contains("count"))
                throw CertificateError("cycle segment needs a 'count'");
            Int n = detail::int_of(seg["count"]);
            if (n < 0)
                throw CertificateError("cycle counts must be nonnegative");
            cert.scheme.beta.push_back(detail::trace_of(model, seg["cycle"]));
            cert.counts.push_back(std::move(n));
            cert.scheme.alpha.emplace_back();
        } else {
            throw CertificateError("a segment is either a path or a cycle");
        }
    }
    return cert;
}

inline ParsedCertificate parse_certificate(const Tvass& model, const std::string& text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw CertificateError(std::string("certificate is not JSON: ") + e.what());
    }
    return parse_certificate(model, j);
}

inline json certificate_json(const Tvass& model, const decide::Certificate& cert)
{
    struct Visitor {
        const Tvass& model;
        json operator()(const std::monostate&) const { return nullptr; }
        json operator()(const Trace& t) const { return certificate_json(model, t); }
        json operator()(const CountedLps& c) const { return certificate_json(model, c); }
        json operator()(const decide::UnboundedWitness& w) const
        {
            return {{"type", "pump"}, {"prefix", detail::names_of(model, w.prefix)}, {"pump", detail::names_of(model, w.pump)}};
        }
        json operator()(const decide::Lasso& l) const
        {
            return {{"type", "lasso"}, {"prefix", detail::names_of(model, l.prefix)}, {"cycle", detail::names_of(model, l.cycle)}};
        }
    };
    return std::visit(Visitor{model}, cert);
}

inline json verdict_json(const Tvass& model, const std::string& query, const std::string& label, const decide::Verdict& v)
{
    json caps = {{"norm", detail::int_json(v.caps.norm)}, {"steps", detail::int_json(v.caps.steps)}};
    if (v.caps.depth)
        caps["depth"] = v.caps.depth->str();
    json out = {{"schema", "tvr/1"},
                {"query", query},
                {"verdict", label},
                {"outcome", decide::to_string(v.outcome)},
                {"certificate", certificate_json(model, v.certificate)},
                {"caps", caps},
                {"evidence", v.evidence},
                {"stats", {{"explored", v.stats.explored}, {"peak_frontier", v.stats.peak_frontier}}}};
    if (v.reachable_size)
        out["reachable_size"] = *v.reachable_size;
    return out;
}

/// Each ordered pair of states (loops included) gets a transition with
/// probability `edge_probability`; it is a zero-test with probability
/// `test_density`, otherwise an addition uniform in [-max_norm,max_norm]².
/// States are q0, q1, …; transitions t0, t1, … in generation order.
inline Tvass random_instance(std::uint64_t seed, std::size_t num_states, std::int64_t max_norm, double test_density,
                             double edge_probability = 0.5)
{
    if (num_states < 1)
        throw UsageError("random_instance needs at least one state");
    if (max_norm < 0)
        throw UsageError("max_norm must be nonnegative");
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution edge(edge_probability);
    std::bernoulli_distribution test(test_density);
    std::uniform_int_distribution<std::int64_t> component(-max_norm, max_norm);
    std::vector<std::string> states;
    for (std::size_t i = 0; i < num_states; ++i)
        states.push_back("q" + std::to_string(i));
    std::vector<TransitionSpec> specs;
    for (std::size_t p = 0; p < num_states; ++p)
        for (std::size_t q = 0; q < num_states; ++q) {
            if (!edge(rng))
                continue;
            const std::string id = "t" + std::to_string(specs.size());
            if (test(rng)) {
                specs.push_back(TransitionSpec{id, states[p], Action::test(), states[q]});
            } else {
                const std::int64_t a = component(rng);
                const std::int64_t b = component(rng);
                specs.push_back(TransitionSpec{id, states[p], Action::add(IntVector{a, b}), states[q]});
            }
        }
    return Tvass(2, states, specs, true);
}

} // namespace tvr::io
