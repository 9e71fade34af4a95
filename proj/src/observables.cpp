#include "adl/observables.hpp"

#include "adl/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <charconv>

namespace adl {

namespace {

// Recursive descent over: expr := ['-'] term (('+'|'-') term)*
//                         term := factor (('*'|'/') factor)*
//                         factor := number | beta | var ['[' int ']'] ['^' int]
class Parser {
public:
    Parser(std::string_view text, double beta) : text_(text), beta_(beta) {}

    std::vector<Observable::Term> parse()
    {
        std::vector<Observable::Term> terms;
        skip();
        double sign = 1.0;
        if (peek() == '-') {
            ++pos_;
            sign = -1.0;
        } else if (peek() == '+') {
            ++pos_;
        }
        terms.push_back(term(sign));
        skip();
        while (pos_ < text_.size()) {
            const char op = text_[pos_];
            if (op != '+' && op != '-')
                fail("expected '+' or '-'");
            ++pos_;
            terms.push_back(term(op == '-' ? -1.0 : 1.0));
            skip();
        }
        return terms;
    }

private:
    Observable::Term term(double sign)
    {
        Observable::Term t;
        t.coeff = sign;
        factor(t, false);
        skip();
        while (peek() == '*' || peek() == '/') {
            const bool divide = text_[pos_] == '/';
            ++pos_;
            factor(t, divide);
            skip();
        }
        // merge repeated variables: q*q -> q^2
        std::vector<Observable::Factor> merged;
        for (const auto& f : t.factors) {
            auto it = std::find_if(merged.begin(), merged.end(), [&](const auto& g) {
                return g.var == f.var && g.coord == f.coord;
            });
            if (it == merged.end())
                merged.push_back(f);
            else
                it->power += f.power;
        }
        t.factors = std::move(merged);
        return t;
    }

    void factor(Observable::Term& t, bool divide)
    {
        skip();
        if (pos_ >= text_.size())
            fail("unexpected end of expression");
        const char c = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const double v = number();
            t.coeff = divide ? t.coeff / v : t.coeff * v;
            return;
        }
        const std::string word = identifier();
        if (word == "beta") {
            t.coeff = divide ? t.coeff / beta_ : t.coeff * beta_;
            return;
        }
        if (divide)
            fail("division by a state variable is not a polynomial");

        Observable::Factor f{};
        if (word == "q" || word == "q2") {
            f.var = Observable::Variable::Q;
            f.power = word == "q2" ? 2 : 1;
        } else if (word == "p" || word == "p2") {
            f.var = Observable::Variable::P;
            f.power = word == "p2" ? 2 : 1;
        } else if (word == "xi" || word == "zeta" || word == "xi2" || word == "zeta2") {
            f.var = Observable::Variable::Friction;
            f.power = word.back() == '2' ? 2 : 1;
        } else if (word == "qp" || word == "pq") {
            t.factors.push_back({Observable::Variable::Q, 0, 1});
            t.factors.push_back({Observable::Variable::P, 0, 1});
            return;
        } else {
            fail(fmt::format("unknown symbol '{}'", word));
        }
        skip();
        if (peek() == '[') {
            if (f.var == Observable::Variable::Friction)
                fail("the friction variable is scalar");
            ++pos_;
            f.coord = static_cast<std::size_t>(integer());
            skip();
            if (peek() != ']')
                fail("expected ']'");
            ++pos_;
            skip();
        }
        if (peek() == '^') {
            ++pos_;
            skip();
            f.power *= integer();
        }
        if (f.power < 0)
            fail("negative powers are not polynomial");
        if (f.power > 0)
            t.factors.push_back(f);
    }

    double number()
    {
        const char* begin = text_.data() + pos_;
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(begin, text_.data() + text_.size(), v);
        if (ec != std::errc())
            fail("malformed number");
        pos_ += static_cast<std::size_t>(ptr - begin);
        return v;
    }

    int integer()
    {
        const char* begin = text_.data() + pos_;
        int v = 0;
        const auto [ptr, ec] = std::from_chars(begin, text_.data() + text_.size(), v);
        if (ec != std::errc())
            fail("expected an integer");
        pos_ += static_cast<std::size_t>(ptr - begin);
        return v;
    }

    std::string identifier()
    {
        std::string out;
        while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_])))
            out.push_back(text_[pos_++]);
        if (out.empty())
            fail("expected a symbol");
        return out;
    }

    char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

    void skip()
    {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
    }

    [[noreturn]] void fail(const std::string& why) const
    {
        throw ParameterError(fmt::format("cannot parse observable '{}' at offset {}: {}", text_, pos_, why));
    }

    std::string_view text_;
    double beta_;
    std::size_t pos_ = 0;
};

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

} // namespace

Observable Observable::parse(std::string_view text, double beta)
{
    text = trim(text);
    if (text.empty())
        throw ParameterError("empty observable");
    Observable obs;
    obs.name_ = std::string(text);
    obs.terms_ = Parser(text, beta).parse();
    return obs;
}

std::size_t Observable::min_dimension() const noexcept
{
    std::size_t n = 0;
    for (const auto& t : terms_)
        for (const auto& f : t.factors)
            if (f.var != Variable::Friction)
                n = std::max(n, f.coord + 1);
    return n;
}

int Observable::degree(Variable var) const noexcept
{
    int d = 0;
    for (const auto& t : terms_)
        for (const auto& f : t.factors)
            if (f.var == var)
                d = std::max(d, f.power);
    return d;
}

double Observable::operator()(const SamplerState& s) const noexcept
{
    double total = 0.0;
    for (const auto& t : terms_) {
        double v = t.coeff;
        for (const auto& f : t.factors) {
            const double x = f.var == Variable::Q   ? s.q[f.coord]
                             : f.var == Variable::P ? s.p[f.coord]
                                                    : s.friction;
            double pw = 1.0;
            for (int k = 0; k < f.power; ++k)
                pw *= x;
            v *= pw;
        }
        total += v;
    }
    return total;
}

std::vector<Observable> parse_observables(const std::vector<std::string>& names, double beta)
{
    std::vector<Observable> out;
    out.reserve(names.size());
    for (const auto& n : names)
        out.push_back(Observable::parse(n, beta));
    return out;
}

} // namespace adl
