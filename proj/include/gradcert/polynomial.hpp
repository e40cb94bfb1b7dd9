#pragma once

#include "gradcert/rational.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace gradcert {

/// Exponent multi-index; always exactly num_vars entries, all >= 0.
using Exponents = std::vector<int>;

inline int exponent_degree(const Exponents& e) {
    return std::accumulate(e.begin(), e.end(), 0);
}

/// Term order: total degree ascending, then lexicographically descending,
/// so within one degree the first-variable-heavy monomials print first.
struct GradedLexOrder {
    bool operator()(const Exponents& a, const Exponents& b) const {
        const int da = exponent_degree(a);
        const int db = exponent_degree(b);
        if (da != db) return da < db;
        return std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
    }
};

/**
 * Sparse multivariate polynomial with exact rational coefficients.
 *
 * Invariants: no stored coefficient is zero, every exponent index has
 * exactly num_vars entries, and the zero polynomial is the empty map.
 */
class Polynomial {
public:
    using TermMap = std::map<Exponents, Rational, GradedLexOrder>;

    explicit Polynomial(int num_vars) : num_vars_(num_vars) {
        if (num_vars < 1) throw std::invalid_argument("polynomial needs at least one variable");
    }

    static Polynomial monomial(int num_vars, Exponents e, Rational c) {
        Polynomial p(num_vars);
        p.add_term(std::move(e), std::move(c));
        return p;
    }

    int num_vars() const { return num_vars_; }
    bool is_zero() const { return terms_.empty(); }
    const TermMap& terms() const { return terms_; }
    std::size_t term_count() const { return terms_.size(); }

    void add_term(Exponents e, Rational c) {
        if (static_cast<int>(e.size()) != num_vars_)
            throw std::invalid_argument("exponent index has wrong length");
        for (int k : e)
            if (k < 0) throw std::invalid_argument("negative exponent");
        if (c == 0) return;
        auto [it, inserted] = terms_.emplace(std::move(e), c);
        if (!inserted) {
            it->second += c;
            if (it->second == 0) terms_.erase(it);
        }
    }

    /// Total degree; -1 for the zero polynomial.
    int total_degree() const {
        return terms_.empty() ? -1 : exponent_degree(terms_.rbegin()->first);
    }

    /// Minimal total degree over terms; -1 for the zero polynomial.
    int min_degree() const {
        return terms_.empty() ? -1 : exponent_degree(terms_.begin()->first);
    }

    Rational constant_term() const {
        Exponents zero(num_vars_, 0);
        auto it = terms_.find(zero);
        return it == terms_.end() ? Rational(0) : it->second;
    }

    Polynomial derivative(int var) const {
        if (var < 0 || var >= num_vars_) throw std::invalid_argument("variable index out of range");
        Polynomial out(num_vars_);
        for (const auto& [e, c] : terms_) {
            if (e[var] == 0) continue;
            Exponents f = e;
            f[var] -= 1;
            out.add_term(std::move(f), c * e[var]);
        }
        return out;
    }

    bool is_homogeneous() const {
        return terms_.empty() || total_degree() == min_degree();
    }

    friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
        check_same_vars(a, b);
        Polynomial out = a;
        for (const auto& [e, c] : b.terms_) out.add_term(e, c);
        return out;
    }

    friend Polynomial operator-(const Polynomial& a, const Polynomial& b) {
        check_same_vars(a, b);
        Polynomial out = a;
        for (const auto& [e, c] : b.terms_) out.add_term(e, -c);
        return out;
    }

    Polynomial operator-() const {
        Polynomial out(num_vars_);
        for (const auto& [e, c] : terms_) out.add_term(e, -c);
        return out;
    }

    friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
        check_same_vars(a, b);
        Polynomial out(a.num_vars_);
        for (const auto& [ea, ca] : a.terms_)
            for (const auto& [eb, cb] : b.terms_) {
                Exponents e(a.num_vars_);
                for (int j = 0; j < a.num_vars_; ++j) e[j] = ea[j] + eb[j];
                out.add_term(std::move(e), ca * cb);
            }
        return out;
    }

    friend Polynomial operator*(const Rational& s, const Polynomial& p) {
        Polynomial out(p.num_vars_);
        for (const auto& [e, c] : p.terms_) out.add_term(e, s * c);
        return out;
    }

    friend bool operator==(const Polynomial& a, const Polynomial& b) {
        return a.num_vars_ == b.num_vars_ && a.terms_ == b.terms_;
    }

private:
    static void check_same_vars(const Polynomial& a, const Polynomial& b) {
        if (a.num_vars_ != b.num_vars_)
            throw std::invalid_argument("mixed variable counts");
    }

    int num_vars_;
    TermMap terms_;
};

/// f written as omega + residual with omega homogeneous of minimal degree d.
struct InitialFormDecomposition {
    Polynomial omega;
    Polynomial residual;
    int d = 0;
};

struct ParseError : std::runtime_error {
    ParseError(const std::string& msg, std::size_t off)
        : std::runtime_error(msg + " at offset " + std::to_string(off)), offset(off) {}
    std::size_t offset;
};

namespace detail {

inline bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
inline bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
inline bool digit(char c) { return std::isdigit(static_cast<unsigned char>(c)); }

} // namespace detail

/**
 * Grammar: terms joined by +/-; a term is an optional rational coefficient
 * (3, -2, 7/2) and variable powers x^k (k a positive decimal integer),
 * juxtaposed with optional '*'. Whitespace is insignificant; parentheses
 * are not supported. Numeric factors may appear anywhere in a term.
 */
inline Polynomial parse_polynomial(const std::string& text, const std::vector<std::string>& variables) {
    if (variables.empty()) throw std::invalid_argument("variable list is empty");
    for (std::size_t a = 0; a < variables.size(); ++a)
        for (std::size_t b = a + 1; b < variables.size(); ++b)
            if (variables[a] == variables[b])
                throw std::invalid_argument("duplicate variable name '" + variables[a] + "'");

    const int n = static_cast<int>(variables.size());
    const std::size_t len = text.size();
    std::size_t i = 0;
    auto skip_ws = [&] { while (i < len && std::isspace(static_cast<unsigned char>(text[i]))) ++i; };

    auto lex_integer = [&](const char* what) -> long long {
        std::size_t start = i;
        unsigned long long v = 0;
        while (i < len && detail::digit(text[i])) {
            v = v * 10 + static_cast<unsigned long long>(text[i] - '0');
            if (v > 1000000ull) throw ParseError(std::string(what) + " too large", start);
            ++i;
        }
        return static_cast<long long>(v);
    };

    Polynomial p(n);
    skip_ws();
    if (i >= len) throw ParseError("empty polynomial", i);

    bool first_term = true;
    while (true) {
        skip_ws();
        if (i >= len) break;

        int sign = 1;
        if (first_term) {
            if (text[i] == '+' || text[i] == '-') {
                if (text[i] == '-') sign = -1;
                ++i;
            }
        } else {
            if (text[i] == '+') { ++i; }
            else if (text[i] == '-') { sign = -1; ++i; }
            else throw ParseError("expected '+' or '-' between terms", i);
        }
        first_term = false;

        Rational coeff = 1;
        Exponents expo(n, 0);
        bool have_factor = false;
        bool star_pending = false;

        while (true) {
            skip_ws();
            if (i >= len || text[i] == '+' || text[i] == '-') {
                if (star_pending) throw ParseError("expected factor after '*'", i);
                break;
            }
            if (detail::digit(text[i])) {
                long long num = lex_integer("coefficient");
                Rational value(num);
                if (i < len && text[i] == '/') {
                    std::size_t slash = i;
                    ++i;
                    if (i >= len || !detail::digit(text[i]))
                        throw ParseError("expected digits after '/'", i);
                    long long den = lex_integer("denominator");
                    if (den == 0) throw ParseError("zero denominator", slash + 1);
                    value = Rational(num) / den;
                }
                if (i < len && text[i] == '.')
                    throw ParseError("decimal coefficients are not supported", i);
                coeff *= value;
                have_factor = true;
                star_pending = false;
            } else if (detail::ident_start(text[i])) {
                std::size_t start = i;
                while (i < len && detail::ident_char(text[i])) ++i;
                const std::string name = text.substr(start, i - start);
                int var = -1;
                for (int j = 0; j < n; ++j)
                    if (variables[j] == name) { var = j; break; }
                if (var < 0) throw ParseError("unknown variable '" + name + "'", start);

                long long k = 1;
                std::size_t before_caret = i;
                skip_ws();
                if (i < len && text[i] == '^') {
                    ++i;
                    skip_ws();
                    if (i < len && text[i] == '-')
                        throw ParseError("exponent must be a positive integer", i);
                    if (i >= len || !detail::digit(text[i]))
                        throw ParseError("expected exponent after '^'", i);
                    k = lex_integer("exponent");
                    if (i < len && (text[i] == '.' || text[i] == '/'))
                        throw ParseError("non-integer exponent", i);
                    if (k == 0) throw ParseError("exponent must be a positive integer", i);
                } else {
                    i = before_caret;
                }
                expo[var] += static_cast<int>(k);
                have_factor = true;
                star_pending = false;
            } else if (text[i] == '*') {
                if (!have_factor || star_pending)
                    throw ParseError("unexpected '*'", i);
                ++i;
                star_pending = true;
            } else {
                throw ParseError(std::string("unexpected character '") + text[i] + "'", i);
            }
        }
        if (!have_factor) throw ParseError("empty term", i);
        p.add_term(std::move(expo), sign * coeff);
    }
    return p;
}

inline std::string rational_to_string(const Rational& q) {
    std::ostringstream os;
    os << q;
    return os.str();
}

inline std::string to_string(const Polynomial& p, const std::vector<std::string>& variables) {
    if (static_cast<int>(variables.size()) != p.num_vars())
        throw std::invalid_argument("variable list length mismatch");
    if (p.is_zero()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [e, c] : p.terms()) {
        const bool neg = c < 0;
        const Rational a = neg ? Rational(-c) : c;
        if (first) {
            if (neg) os << "-";
        } else {
            os << (neg ? " - " : " + ");
        }
        first = false;

        std::vector<std::string> factors;
        if (a != 1 || exponent_degree(e) == 0) factors.push_back(rational_to_string(a));
        for (int j = 0; j < p.num_vars(); ++j) {
            if (e[j] == 0) continue;
            if (e[j] == 1) factors.push_back(variables[j]);
            else factors.push_back(variables[j] + "^" + std::to_string(e[j]));
        }
        for (std::size_t k = 0; k < factors.size(); ++k) {
            if (k) os << "*";
            os << factors[k];
        }
    }
    return os.str();
}

inline double pow_int(double x, int k) {
    double r = 1.0;
    while (k > 0) {
        if (k & 1) r *= x;
        x *= x;
        k >>= 1;
    }
    return r;
}

inline double evaluate(const Polynomial& p, const std::vector<double>& point) {
    if (static_cast<int>(point.size()) != p.num_vars())
        throw std::invalid_argument("point dimension mismatch");
    double sum = 0.0;
    for (const auto& [e, c] : p.terms()) {
        double t = to_double(c);
        for (int j = 0; j < p.num_vars(); ++j)
            if (e[j]) t *= pow_int(point[j], e[j]);
        sum += t;
    }
    return sum;
}

inline Rational evaluate_exact(const Polynomial& p, const std::vector<Rational>& point) {
    if (static_cast<int>(point.size()) != p.num_vars())
        throw std::invalid_argument("point dimension mismatch");
    Rational sum = 0;
    for (const auto& [e, c] : p.terms()) {
        Rational t = c;
        for (int j = 0; j < p.num_vars(); ++j)
            for (int k = 0; k < e[j]; ++k) t *= point[j];
        sum += t;
    }
    return sum;
}

inline std::vector<Polynomial> gradient(const Polynomial& p) {
    std::vector<Polynomial> g;
    g.reserve(p.num_vars());
    for (int j = 0; j < p.num_vars(); ++j) g.push_back(p.derivative(j));
    return g;
}

/// Matrix of second partials at a point; symmetric by construction.
inline Eigen::MatrixXd hessian_at(const Polynomial& p, const std::vector<double>& point) {
    const int n = p.num_vars();
    if (static_cast<int>(point.size()) != n)
        throw std::invalid_argument("point dimension mismatch");
    Eigen::MatrixXd h(n, n);
    for (int a = 0; a < n; ++a) {
        Polynomial da = p.derivative(a);
        for (int b = a; b < n; ++b) {
            const double v = evaluate(da.derivative(b), point);
            h(a, b) = v;
            h(b, a) = v;
        }
    }
    return h;
}

/// Splits off the sum of minimal-degree terms. Requires a non-zero input
/// without constant term (the germ must vanish at the origin).
inline InitialFormDecomposition initial_form(const Polynomial& p) {
    if (p.is_zero())
        throw std::invalid_argument("zero polynomial has no initial form");
    if (p.constant_term() != 0)
        throw std::invalid_argument("origin is not a zero of the polynomial (constant term present)");
    const int d = p.min_degree();
    Polynomial omega(p.num_vars());
    Polynomial residual(p.num_vars());
    for (const auto& [e, c] : p.terms()) {
        if (exponent_degree(e) == d) omega.add_term(e, c);
        else residual.add_term(e, c);
    }
    return InitialFormDecomposition{std::move(omega), std::move(residual), d};
}

/**
 * Flattened double-precision view of a polynomial for hot evaluation loops.
 * Also provides a sound upper bound for |p| over an axis-aligned box.
 */
struct EvalTable {
    static constexpr int kMaxVars = 8;

    struct Term {
        double c;
        std::array<std::uint16_t, kMaxVars> e;
    };

    int n = 0;
    std::vector<Term> terms;

    double operator()(const double* x) const {
        double sum = 0.0;
        for (const Term& t : terms) {
            double v = t.c;
            for (int j = 0; j < n; ++j) {
                int k = t.e[j];
                double b = x[j];
                while (k > 0) {
                    if (k & 1) v *= b;
                    b *= b;
                    k >>= 1;
                }
            }
            sum += v;
        }
        return sum;
    }

    double operator()(const std::vector<double>& x) const { return (*this)(x.data()); }

    /// sum over terms of |c| * prod max(|lo_j|,|hi_j|)^e_j  >=  sup_box |p|.
    double sup_abs_on_box(const double* lo, const double* hi) const {
        double sum = 0.0;
        for (const Term& t : terms) {
            double v = std::abs(t.c);
            for (int j = 0; j < n; ++j) {
                const double m = std::max(std::abs(lo[j]), std::abs(hi[j]));
                int k = t.e[j];
                double b = m;
                while (k > 0) {
                    if (k & 1) v *= b;
                    b *= b;
                    k >>= 1;
                }
            }
            sum += v;
        }
        return sum;
    }
};

inline EvalTable make_eval_table(const Polynomial& p) {
    if (p.num_vars() > EvalTable::kMaxVars)
        throw std::invalid_argument("too many variables for EvalTable");
    EvalTable t;
    t.n = p.num_vars();
    t.terms.reserve(p.term_count());
    for (const auto& [e, c] : p.terms()) {
        EvalTable::Term term{};
        term.c = to_double(c);
        term.e.fill(0);
        for (int j = 0; j < t.n; ++j) term.e[j] = static_cast<std::uint16_t>(e[j]);
        t.terms.push_back(term);
    }
    return t;
}

/// Crude global gradient bound on the closed ball of the given radius:
/// sum over terms of |c| * degree * radius^(degree-1).
inline double global_gradient_bound(const Polynomial& p, double radius) {
    double sum = 0.0;
    for (const auto& [e, c] : p.terms()) {
        const int d = exponent_degree(e);
        if (d == 0) continue;
        sum += std::abs(to_double(c)) * d * pow_int(radius, d - 1);
    }
    return sum;
}

} // namespace gradcert
