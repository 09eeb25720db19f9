#pragma once

/**
 * @file spec_parse.hpp
 * @brief Mini-languages for partitions, paths and functionals.
 *
 *   partition   dyadic:T=1,levels=4..14 | uniform:T=1,n=1000[,levels=1..4] | custom:0;0.5;1|0;0.25;0.5;1
 *   path        term ('+' term)*
 *               step:0.5=2.0;0.75=-1.0[;T=1]   (vector jumps as a|b)
 *               fs:levels=14,seed=42[,T=1,dim=1] | pl:file=nodes.csv | const:c=1[,T=1] | zero[:dim=1,T=1]
 *   functional  product ('+' product)*, product = factor ('*' factor)*, factor = number | builtin
 *               eval:f=square | follmer:f=square | qvint:phi=identity | qveval:f=identity | lefteval:f=identity
 *               affine:a=1,b=2 | oneform:f=identity[|square] | heat1..heat4 | time:k=1 | jump:t0=0.5
 *
 * Errors name the offending token and its character position.
 */

#include "builtins.hpp"
#include "csv.hpp"
#include "partition.hpp"
#include "path.hpp"

#include <cstdlib>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace pathcalc {

class ParseError : public InvalidArgument {
public:
    ParseError(const std::string& spec, std::size_t pos, const std::string& token, const std::string& what)
        : InvalidArgument("cannot parse '" + spec + "' at position " + std::to_string(pos) + " (token '" + token +
                          "'): " + what) {}
};

namespace detail {

struct Token {
    std::string text;
    std::size_t pos;
};

/// Split on `sep`, keeping absolute positions; `keep` decides whether a separator splits.
template <class Keep>
std::vector<Token> split(const Token& t, char sep, Keep keep) {
    std::vector<Token> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= t.text.size(); ++i) {
        if (i == t.text.size() || (t.text[i] == sep && keep(t.text, i))) {
            out.push_back({t.text.substr(start, i - start), t.pos + start});
            start = i + 1;
        }
    }
    return out;
}

inline std::vector<Token> split(const Token& t, char sep) {
    return split(t, sep, [](const std::string&, std::size_t) { return true; });
}

/// Split a sum of terms on '+'.
inline std::vector<Token> split_terms(const Token& t) {
    // a '+' splits unless it is the sign of an exponent such as 1e+5
    return split(t, '+', [](const std::string& s, std::size_t i) {
        const bool exponent = i >= 2 && (s[i - 1] == 'e' || s[i - 1] == 'E') &&
                              (std::isdigit(static_cast<unsigned char>(s[i - 2])) || s[i - 2] == '.');
        return !exponent;
    });
}

class SpecReader {
public:
    explicit SpecReader(std::string spec) : spec_(std::move(spec)) {}

    const std::string& spec() const { return spec_; }

    [[noreturn]] void fail(const Token& t, const std::string& what) const { throw ParseError(spec_, t.pos, t.text, what); }

    double number(const Token& t) const {
        const char* b = t.text.c_str();
        char* e = nullptr;
        const double v = std::strtod(b, &e);
        if (t.text.empty() || e != b + t.text.size() || !std::isfinite(v)) fail(t, "expected a number");
        return v;
    }

    long integer(const Token& t) const {
        const char* b = t.text.c_str();
        char* e = nullptr;
        const long v = std::strtol(b, &e, 10);
        if (t.text.empty() || e != b + t.text.size()) fail(t, "expected an integer");
        return v;
    }

    Vector vec(const Token& t) const {
        const auto parts = split(t, '|');
        Vector v(static_cast<Eigen::Index>(parts.size()));
        if (parts.size() > static_cast<std::size_t>(kMaxDim)) fail(t, "vector has more than 16 entries");
        for (std::size_t i = 0; i < parts.size(); ++i) v(static_cast<Eigen::Index>(i)) = number(parts[i]);
        return v;
    }

    std::pair<int, int> range(const Token& t) const {
        const auto dots = t.text.find("..");
        if (dots == std::string::npos) {
            const int v = static_cast<int>(integer(t));
            return {v, v};
        }
        const Token a{t.text.substr(0, dots), t.pos}, b{t.text.substr(dots + 2), t.pos + dots + 2};
        return {static_cast<int>(integer(a)), static_cast<int>(integer(b))};
    }

    /// kind[:body] -> (kind token, body token)
    std::pair<Token, std::optional<Token>> head(const Token& t) const {
        const auto colon = t.text.find(':');
        if (colon == std::string::npos) return {t, std::nullopt};
        return {Token{t.text.substr(0, colon), t.pos}, Token{t.text.substr(colon + 1), t.pos + colon + 1}};
    }

    /// key=value pairs separated by `sep`; unknown keys are rejected.
    std::vector<std::pair<Token, Token>> pairs(const std::optional<Token>& body, char sep,
                                               const std::vector<std::string>& allowed) const {
        std::vector<std::pair<Token, Token>> out;
        if (!body || body->text.empty()) return out;
        for (const auto& kv : split(*body, sep)) {
            const auto eq = kv.text.find('=');
            if (eq == std::string::npos) fail(kv, "expected key=value");
            Token k{kv.text.substr(0, eq), kv.pos}, v{kv.text.substr(eq + 1), kv.pos + eq + 1};
            if (!allowed.empty() && std::find(allowed.begin(), allowed.end(), k.text) == allowed.end())
                fail(k, "unknown key");
            for (const auto& prev : out)
                if (prev.first.text == k.text) fail(k, "duplicate key");
            out.emplace_back(std::move(k), std::move(v));
        }
        return out;
    }

private:
    std::string spec_;
};

inline const Token* find(const std::vector<std::pair<Token, Token>>& kv, const std::string& key) {
    for (const auto& p : kv)
        if (p.first.text == key) return &p.second;
    return nullptr;
}

} // namespace detail

// ---------------------------------------------------------------------------
// partitions

/// `levels` (if given) overrides the levels in the spec.
inline PartitionSequence parse_partition(const std::string& spec, std::optional<std::pair<int, int>> levels = {}) {
    detail::SpecReader r(spec);
    const detail::Token all{spec, 0};
    const auto [kind, body] = r.head(all);
    auto level_range = [&](const std::vector<std::pair<detail::Token, detail::Token>>& kv, std::pair<int, int> dflt) {
        if (levels) return *levels;
        if (const auto* t = detail::find(kv, "levels")) {
            const auto lr = r.range(*t);
            if (lr.first > lr.second) r.fail(*t, "empty level range");
            return lr;
        }
        return dflt;
    };
    try {
        if (kind.text == "dyadic") {
            const auto kv = r.pairs(body, ',', {"T", "levels"});
            const double T = detail::find(kv, "T") ? r.number(*detail::find(kv, "T")) : 1.0;
            const auto [lo, hi] = level_range(kv, {4, 14});
            return dyadic_sequence(T, hi, lo);
        }
        if (kind.text == "uniform") {
            const auto kv = r.pairs(body, ',', {"T", "n", "levels"});
            const double T = detail::find(kv, "T") ? r.number(*detail::find(kv, "T")) : 1.0;
            const auto* n = detail::find(kv, "n");
            if (!n) r.fail(kind, "uniform partitions need n=<intervals>");
            const long base = r.integer(*n);
            if (base < 1) r.fail(*n, "interval count must be positive");
            const auto [lo, hi] = level_range(kv, {1, 4});
            return uniform_sequence(T, static_cast<std::size_t>(base), hi, lo);
        }
        if (kind.text == "custom") {
            if (!body) r.fail(kind, "custom partitions need point lists");
            std::vector<std::vector<double>> lists;
            for (const auto& lv : detail::split(*body, '|')) {
                std::vector<double> pts;
                for (const auto& p : detail::split(lv, ';')) pts.push_back(r.number(p));
                lists.push_back(std::move(pts));
            }
            return custom_sequence(std::move(lists));
        }
    } catch (const ParseError&) {
        throw;
    } catch (const InvalidArgument& e) {
        throw ParseError(spec, 0, spec, e.what());
    }
    r.fail(kind, "unknown partition kind (expected dyadic, uniform or custom)");
}

// ---------------------------------------------------------------------------
// paths

struct PathParseOptions {
    std::optional<std::uint64_t> seed; ///< overrides fs seeds
};

inline CadlagPath parse_path(const std::string& spec, const PathParseOptions& opt = {}) {
    detail::SpecReader r(spec);
    std::optional<CadlagPath> total;
    for (const auto& term : detail::split_terms(detail::Token{spec, 0})) {
        const auto [kind, body] = r.head(term);
        CadlagPath x;
        try {
            if (kind.text == "step") {
                if (!body) r.fail(kind, "step paths need time=jump entries");
                double T = 1.0;
                std::vector<JumpPoint> jumps;
                for (const auto& kv : r.pairs(body, ';', {})) {
                    if (kv.first.text == "T")
                        T = r.number(kv.second);
                    else
                        jumps.push_back({r.number(kv.first), r.vec(kv.second)});
                }
                if (jumps.empty()) r.fail(*body, "step path without jumps");
                x = step_path(jumps, T);
            } else if (kind.text == "fs") {
                const auto kv = r.pairs(body, ',', {"levels", "seed", "T", "dim"});
                const auto* lv = detail::find(kv, "levels");
                if (!lv) r.fail(kind, "fs paths need levels=<M>");
                const long M = r.integer(*lv);
                std::uint64_t seed = detail::find(kv, "seed") ? static_cast<std::uint64_t>(r.integer(*detail::find(kv, "seed"))) : 42;
                if (opt.seed) seed = *opt.seed;
                const double T = detail::find(kv, "T") ? r.number(*detail::find(kv, "T")) : 1.0;
                const long dim = detail::find(kv, "dim") ? r.integer(*detail::find(kv, "dim")) : 1;
                x = faber_schauder_path(static_cast<int>(M), seed, T, static_cast<int>(dim));
            } else if (kind.text == "pl") {
                const auto kv = r.pairs(body, ',', {"file"});
                const auto* f = detail::find(kv, "file");
                if (!f) r.fail(kind, "pl paths need file=<csv>");
                x = read_path_csv_file(f->text);
            } else if (kind.text == "const") {
                const auto kv = r.pairs(body, ',', {"c", "T"});
                const auto* c = detail::find(kv, "c");
                if (!c) r.fail(kind, "constant paths need c=<value>");
                x = constant_path(r.vec(*c), detail::find(kv, "T") ? r.number(*detail::find(kv, "T")) : 1.0);
            } else if (kind.text == "zero") {
                const auto kv = r.pairs(body, ',', {"dim", "T"});
                x = zero_path(detail::find(kv, "dim") ? static_cast<int>(r.integer(*detail::find(kv, "dim"))) : 1,
                              detail::find(kv, "T") ? r.number(*detail::find(kv, "T")) : 1.0);
            } else {
                r.fail(kind, "unknown path kind (expected step, fs, pl, const or zero)");
            }
        } catch (const ParseError&) {
            throw;
        } catch (const InvalidArgument& e) {
            throw ParseError(spec, term.pos, term.text, e.what());
        }
        if (!total) {
            total = x;
        } else {
            if (total->dimension() != x.dimension() || total->horizon() != x.horizon())
                r.fail(term, "summand has a different dimension or horizon");
            total = *total + x;
        }
    }
    return *total;
}

// ---------------------------------------------------------------------------
// functionals

struct FunctionalParseOptions {
    int dimension = 1; ///< path dimension; 1-forms replicate a single function across coordinates
};

namespace detail {

inline Functional parse_builtin(const SpecReader& r, const Token& t, const FunctionalParseOptions& opt) {
    const auto [kind, body] = r.head(t);
    auto scalar_fn = [&](const char* key) {
        const auto kv = r.pairs(body, ',', {key});
        const auto* f = find(kv, key);
        if (!f) r.fail(kind, std::string("missing ") + key + "=<name>");
        try {
            return scalar_function(f->text);
        } catch (const InvalidArgument&) {
            r.fail(*f, "unknown function name");
        }
    };
    if (kind.text == "eval") return eval(scalar_fn("f"));
    if (kind.text == "follmer") return follmer_grad(scalar_fn("f"));
    if (kind.text == "qveval") return qv_eval(scalar_fn("f"));
    if (kind.text == "lefteval") return left_eval(scalar_fn("f"));
    if (kind.text == "qvint") {
        const auto kv = r.pairs(body, ',', {"phi"});
        const auto* f = find(kv, "phi");
        if (!f) r.fail(kind, "missing phi=<name>");
        try {
            return qv_integral(matrix_function(f->text));
        } catch (const InvalidArgument&) {
            r.fail(*f, "unknown integrand name");
        }
    }
    if (kind.text == "affine") {
        const auto kv = r.pairs(body, ',', {"a", "b"});
        const double a = find(kv, "a") ? r.number(*find(kv, "a")) : 0.0;
        Vector b = find(kv, "b") ? r.vec(*find(kv, "b")) : Vector::Ones(opt.dimension);
        if (b.size() == 1 && opt.dimension > 1) b = Vector::Constant(opt.dimension, b(0));
        return markov_affine(a, b);
    }
    if (kind.text == "oneform") {
        const auto kv = r.pairs(body, ',', {"f"});
        const auto* f = find(kv, "f");
        if (!f) r.fail(kind, "missing f=<name>[|<name>...]");
        std::vector<ScalarFunction> fs;
        for (const auto& n : split(*f, '|')) {
            try {
                fs.push_back(scalar_function(n.text));
            } catch (const InvalidArgument&) {
                r.fail(n, "unknown function name");
            }
        }
        if (fs.size() == 1)
            while (static_cast<int>(fs.size()) < opt.dimension) fs.push_back(fs.front());
        if (static_cast<int>(fs.size()) != opt.dimension) r.fail(*f, "need one function per path coordinate");
        return bracket_1form(fs);
    }
    if (kind.text == "heat1" || kind.text == "heat2" || kind.text == "heat3" || kind.text == "heat4") {
        if (body) r.fail(*body, "heat polynomials take no parameters");
        return markov(heat_polynomial(kind.text.back() - '0'));
    }
    if (kind.text == "time") {
        const auto kv = r.pairs(body, ',', {"k"});
        return time_power(find(kv, "k") ? static_cast<int>(r.integer(*find(kv, "k"))) : 1);
    }
    if (kind.text == "jump") {
        const auto kv = r.pairs(body, ',', {"t0"});
        const auto* t0 = find(kv, "t0");
        if (!t0) r.fail(kind, "missing t0=<time>");
        return jump_size_at(r.number(*t0));
    }
    r.fail(kind, "unknown functional (expected eval, follmer, qvint, qveval, lefteval, affine, oneform, heatN, time, jump)");
}

inline bool is_number(const std::string& s) {
    if (s.empty()) return false;
    char* e = nullptr;
    std::strtod(s.c_str(), &e);
    return e == s.c_str() + s.size();
}

} // namespace detail

inline Functional parse_functional(const std::string& spec, const FunctionalParseOptions& opt = {}) {
    detail::SpecReader r(spec);
    std::optional<Functional> total;
    for (const auto& term : detail::split_terms(detail::Token{spec, 0})) {
        std::optional<Functional> prod;
        double coef = 1.0;
        for (const auto& factor : detail::split(term, '*')) {
            if (detail::is_number(factor.text)) {
                coef *= r.number(factor);
                continue;
            }
            Functional f = detail::parse_builtin(r, factor, opt);
            prod = prod ? product(*prod, f) : f;
        }
        Functional t = prod ? linear_combination(coef, *prod, 0.0, constant_functional(0.0)) : constant_functional(coef);
        if (prod && coef == 1.0) t = *prod;
        total = total ? linear_combination(1.0, *total, 1.0, t) : t;
    }
    if (!total) r.fail(detail::Token{spec, 0}, "empty functional");
    total->name = spec;
    return *total;
}

} // namespace pathcalc
