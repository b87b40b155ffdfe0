#include "pacer/cost_model.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

namespace pacer {

namespace {

void require(bool cond, const std::string& what) {
    if (!cond) throw ContractViolation(what);
}

double checked_pow_term(double coef, double exp, double bid, const char* what) {
    const double v = coef * std::pow(bid, exp);
    if (!std::isfinite(v)) {
        std::ostringstream os;
        os << "cost term " << coef << "*b^" << exp << " is non-finite at bid " << bid
           << " (" << what << ")";
        throw EvalDomainError(os.str());
    }
    return v;
}

}  // namespace

MonomialCost::MonomialCost(double coefficient, double exponent)
    : coefficient(coefficient), exponent(exponent) {
    require(coefficient > 0.0 && std::isfinite(coefficient),
            "monomial coefficient must be positive and finite");
    require(std::isfinite(exponent), "monomial exponent must be finite");
}

PolynomialCost::PolynomialCost(std::vector<PolyTerm> t) : terms(std::move(t)) {
    require(!terms.empty(), "polynomial cost needs at least one term");
    for (std::size_t i = 0; i < terms.size(); ++i) {
        require(std::isfinite(terms[i].coefficient) && std::isfinite(terms[i].exponent),
                "polynomial term must be finite");
        if (i > 0) {
            require(terms[i].exponent < terms[i - 1].exponent,
                    "polynomial exponents must be strictly decreasing");
        }
    }
}

double PolynomialCost::abs_coefficient_sum() const {
    double s = 0.0;
    for (const auto& t : terms) s += std::abs(t.coefficient);
    return s;
}

GuardedCost::GuardedCost(MonomialCost in, double cap, CapMode mode)
    : inner(std::move(in)), cap(cap), mode(mode) {
    require(cap > 0.0 && std::isfinite(cap), "guard-rail cap M must be positive and finite");
}

GuardedCost::GuardedCost(PolynomialCost in, double cap, CapMode mode)
    : inner(std::move(in)), cap(cap), mode(mode) {
    require(cap > 0.0 && std::isfinite(cap), "guard-rail cap M must be positive and finite");
}

double evaluate(const MonomialCost& fn, double bid) {
    if (bid <= 0.0) {
        if (bid == 0.0 && fn.exponent > 0.0) return 0.0;
        throw EvalDomainError("monomial cost requires bid > 0");
    }
    return checked_pow_term(fn.coefficient, fn.exponent, bid, "monomial");
}

double evaluate(const PolynomialCost& fn, double bid) {
    if (bid <= 0.0) throw EvalDomainError("polynomial cost requires bid > 0");
    double s = 0.0;
    for (const auto& t : fn.terms) {
        s += checked_pow_term(t.coefficient, t.exponent, bid, "polynomial");
    }
    if (!std::isfinite(s)) throw EvalDomainError("polynomial cost sum is non-finite");
    return s;
}

double evaluate(const GuardedCost& fn, double bid) {
    if (bid < 0.0) throw EvalDomainError("guarded cost requires bid >= 0");
    double v;
    if (bid == 0.0) {
        // Inner families vanish at 0 only when every exponent is positive.
        const bool ok = std::visit(
            [](const auto& in) {
                if constexpr (std::is_same_v<std::decay_t<decltype(in)>, MonomialCost>) {
                    return in.exponent > 0.0;
                } else {
                    for (const auto& t : in.terms)
                        if (t.exponent <= 0.0) return false;
                    return true;
                }
            },
            fn.inner);
        if (!ok) throw EvalDomainError("guarded inner cost is singular at bid 0");
        v = 0.0;
    } else {
        v = std::visit([bid](const auto& in) { return evaluate(in, bid); }, fn.inner);
    }
    return fn.mode == CapMode::kCapAbove ? std::min(v, fn.cap) : std::max(v, fn.cap);
}

double evaluate(const CostFn& fn, double bid) {
    return std::visit([bid](const auto& f) { return evaluate(f, bid); }, fn);
}

MonomialEnvelope monomial_envelope(const PolynomialCost& poly, BidRegime regime) {
    for (const auto& t : poly.terms) {
        require(t.coefficient > 0.0,
                "monomial envelope is only defined for all-positive coefficients");
    }
    const double k_env =
        regime == BidRegime::kAtLeastOne ? poly.max_exponent() : poly.min_exponent();
    return MonomialEnvelope{MonomialCost(poly.leading_coefficient(), k_env),
                            MonomialCost(poly.abs_coefficient_sum(), k_env)};
}

// --- expression parser -------------------------------------------------------

namespace {

struct Cursor {
    const std::string& s;
    std::size_t pos = 0;

    void skip_ws() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool eof() {
        skip_ws();
        return pos >= s.size();
    }
    char peek() {
        skip_ws();
        return pos < s.size() ? s[pos] : '\0';
    }
    bool consume(char c) {
        skip_ws();
        if (pos < s.size() && s[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }
    [[noreturn]] void fail(const std::string& what) const {
        std::ostringstream os;
        os << "cost expression error at position " << pos << ": " << what << " in \"" << s
           << "\"";
        throw ContractViolation(os.str());
    }
    double number() {
        skip_ws();
        std::size_t start = pos;
        if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) ++pos;
        bool digits = false;
        while (pos < s.size() &&
               (std::isdigit(static_cast<unsigned char>(s[pos])) || s[pos] == '.')) {
            digits = digits || std::isdigit(static_cast<unsigned char>(s[pos]));
            ++pos;
        }
        if (pos < s.size() && (s[pos] == 'e' || s[pos] == 'E')) {
            ++pos;
            if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) ++pos;
            while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
        }
        if (!digits) fail("expected a decimal literal");
        return std::stod(s.substr(start, pos - start));
    }
};

PolyTerm parse_term(Cursor& c) {
    PolyTerm t{1.0, 1.0};
    c.skip_ws();
    if (c.peek() != 'b') {
        t.coefficient = c.number();
        if (!c.consume('*')) c.fail("expected '*' between coefficient and b");
    }
    if (!c.consume('b')) c.fail("expected 'b'");
    if (c.consume('^')) t.exponent = c.number();
    return t;
}

std::vector<PolyTerm> parse_poly(Cursor& c) {
    std::vector<PolyTerm> terms;
    terms.push_back(parse_term(c));
    while (c.consume('+')) terms.push_back(parse_term(c));
    return terms;
}

CostFn finish_poly(std::vector<PolyTerm> terms) {
    if (terms.size() == 1) return MonomialCost(terms[0].coefficient, terms[0].exponent);
    return PolynomialCost(std::move(terms));
}

}  // namespace

CostFn parse_cost_expr(const std::string& text) {
    Cursor c{text};
    c.skip_ws();
    if (text.compare(c.pos, 4, "min(") == 0 || text.compare(c.pos, 4, "max(") == 0) {
        const CapMode mode =
            text.compare(c.pos, 3, "min") == 0 ? CapMode::kCapAbove : CapMode::kCapBelow;
        c.pos += 4;
        auto terms = parse_poly(c);
        if (!c.consume(',')) c.fail("expected ',' before the cap value");
        const double cap = c.number();
        if (!c.consume(')')) c.fail("expected ')'");
        if (!c.eof()) c.fail("trailing input");
        CostFn inner = finish_poly(std::move(terms));
        if (std::holds_alternative<MonomialCost>(inner)) {
            return GuardedCost(std::get<MonomialCost>(inner), cap, mode);
        }
        return GuardedCost(std::get<PolynomialCost>(inner), cap, mode);
    }
    auto terms = parse_poly(c);
    if (!c.eof()) c.fail("trailing input");
    return finish_poly(std::move(terms));
}

namespace {

void append_terms(std::ostringstream& os, const std::vector<PolyTerm>& terms) {
    for (std::size_t i = 0; i < terms.size(); ++i) {
        if (i) os << "+";
        os << terms[i].coefficient << "*b^" << terms[i].exponent;
    }
}

}  // namespace

std::string to_string(const CostFn& fn) {
    std::ostringstream os;
    if (const auto* m = std::get_if<MonomialCost>(&fn)) {
        os << m->coefficient << "*b^" << m->exponent;
    } else if (const auto* p = std::get_if<PolynomialCost>(&fn)) {
        append_terms(os, p->terms);
    } else {
        const auto& g = std::get<GuardedCost>(fn);
        os << (g.mode == CapMode::kCapAbove ? "min(" : "max(");
        if (const auto* m = std::get_if<MonomialCost>(&g.inner)) {
            os << m->coefficient << "*b^" << m->exponent;
        } else {
            append_terms(os, std::get<PolynomialCost>(g.inner).terms);
        }
        os << "," << g.cap << ")";
    }
    return os.str();
}

}  // namespace pacer
