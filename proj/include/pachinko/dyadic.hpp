#pragma once

// Exact dyadic rationals a/2^k, the only probability scalar in the library.
// Every mass produced by a fair-coin split is dyadic, so all probability
// bookkeeping stays exact.

#include <boost/multiprecision/cpp_int.hpp>

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

namespace pachinko {

using BigInt = boost::multiprecision::cpp_int;

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Non-negative dyadic rational in canonical form: numerator odd, or
// numerator == 0 and exponent == 0.  Value = num / 2^exp.
class Dyadic {
  public:
    Dyadic() = default;
    Dyadic(BigInt numerator, unsigned exponent) : num_(std::move(numerator)), exp_(exponent) {
        if (num_ < 0) throw std::invalid_argument("Dyadic numerator must be non-negative");
        canonicalize();
    }
    explicit Dyadic(unsigned long long n) : num_(n), exp_(0) {}

    static Dyadic zero() { return Dyadic{}; }
    static Dyadic one() { return Dyadic{1}; }
    // 1 / 2^k
    static Dyadic pow2(unsigned k) { return Dyadic{BigInt(1), k}; }

    const BigInt& numerator() const { return num_; }
    unsigned exponent() const { return exp_; }
    bool is_zero() const { return num_ == 0; }
    bool is_one() const { return num_ == 1 && exp_ == 0; }

    Dyadic half() const {
        if (is_zero()) return *this;
        Dyadic r;
        r.num_ = num_;
        r.exp_ = exp_ + 1;
        return r;
    }

    friend Dyadic operator+(const Dyadic& a, const Dyadic& b) {
        unsigned e = std::max(a.exp_, b.exp_);
        Dyadic r;
        r.num_ = (a.num_ << (e - a.exp_)) + (b.num_ << (e - b.exp_));
        r.exp_ = e;
        r.canonicalize();
        return r;
    }
    Dyadic& operator+=(const Dyadic& b) { return *this = *this + b; }

    // Requires a >= b.
    friend Dyadic operator-(const Dyadic& a, const Dyadic& b) {
        unsigned e = std::max(a.exp_, b.exp_);
        BigInt n = (a.num_ << (e - a.exp_)) - (b.num_ << (e - b.exp_));
        if (n < 0) throw std::invalid_argument("Dyadic subtraction would go negative");
        Dyadic r;
        r.num_ = std::move(n);
        r.exp_ = e;
        r.canonicalize();
        return r;
    }

    friend Dyadic operator*(const Dyadic& a, const Dyadic& b) {
        Dyadic r;
        r.num_ = a.num_ * b.num_;
        r.exp_ = a.exp_ + b.exp_;
        r.canonicalize();
        return r;
    }

    friend bool operator==(const Dyadic& a, const Dyadic& b) {
        return a.exp_ == b.exp_ && a.num_ == b.num_;
    }
    friend std::strong_ordering operator<=>(const Dyadic& a, const Dyadic& b) {
        unsigned e = std::max(a.exp_, b.exp_);
        BigInt l = a.num_ << (e - a.exp_);
        BigInt r = b.num_ << (e - b.exp_);
        if (l < r) return std::strong_ordering::less;
        if (l > r) return std::strong_ordering::greater;
        return std::strong_ordering::equal;
    }

    static Dyadic abs_diff(const Dyadic& a, const Dyadic& b) { return a >= b ? a - b : b - a; }

    double to_double() const {
        // Fine for display; exact paths never round-trip through double.
        return num_.convert_to<double>() / std::ldexp(1.0, static_cast<int>(exp_));
    }

    // Binary positional form: 0 -> "0", 1 -> "1.", 3/4 -> ".11", 11/16 -> ".1011".
    std::string to_binary() const {
        if (is_zero()) return "0";
        BigInt ip = num_ >> exp_;
        BigInt frac = num_ - (ip << exp_);
        std::string s;
        if (ip > 0) {
            std::string ipart;
            for (BigInt v = ip; v > 0; v >>= 1) ipart.push_back(boost::multiprecision::bit_test(v, 0) ? '1' : '0');
            s.assign(ipart.rbegin(), ipart.rend());
        }
        s.push_back('.');
        if (frac > 0) {
            for (unsigned i = exp_; i-- > 0;) s.push_back(boost::multiprecision::bit_test(frac, i) ? '1' : '0');
        } else {
            s = (ip > 0) ? s : "0";
        }
        return s;
    }

  private:
    void canonicalize() {
        if (num_ == 0) {
            exp_ = 0;
            return;
        }
        unsigned low = boost::multiprecision::lsb(num_);
        unsigned shift = low < exp_ ? low : exp_;
        num_ >>= shift;
        exp_ -= shift;
    }

    BigInt num_ = 0;
    unsigned exp_ = 0;
};

// parse_binary accepts "0", "1.", ".1011", "0.11" and names the offending
// character otherwise.
inline Dyadic parse_binary(const std::string& s) {
    if (s.empty()) throw ParseError("empty dyadic literal");
    std::size_t i = 0;
    BigInt ip = 0;
    bool saw_int = false;
    while (i < s.size() && (s[i] == '0' || s[i] == '1')) {
        ip = (ip << 1) + (s[i] == '1' ? 1 : 0);
        saw_int = true;
        ++i;
    }
    if (saw_int && i > 1) throw ParseError(std::string("unexpected digit '") + s[1] + "' before the binary point");
    if (i == s.size()) {
        if (!saw_int) throw ParseError(std::string("unexpected character '") + s[0] + "' in dyadic literal");
        return Dyadic{ip, 0};  // bare "0" or "1"
    }
    if (s[i] != '.') throw ParseError(std::string("unexpected character '") + s[i] + "' in dyadic literal");
    ++i;
    BigInt frac = 0;
    unsigned bits = 0;
    for (; i < s.size(); ++i) {
        if (s[i] != '0' && s[i] != '1')
            throw ParseError(std::string("unexpected character '") + s[i] + "' after the binary point");
        frac = (frac << 1) + (s[i] == '1' ? 1 : 0);
        ++bits;
    }
    return Dyadic{(ip << bits) + frac, bits};
}

// Signed exact value num / 2^exp; the first moment of a distribution lives
// here because column indices are signed.
struct Moment {
    BigInt num = 0;
    unsigned exp = 0;

    Moment() = default;
    Moment(BigInt n, unsigned e) : num(std::move(n)), exp(e) { canonicalize(); }

    bool is_zero() const { return num == 0; }
    friend bool operator==(const Moment& a, const Moment& b) = default;

    void canonicalize() {
        if (num == 0) {
            exp = 0;
            return;
        }
        while (exp > 0 && (num & 1) == 0) {
            num >>= 1;
            --exp;
        }
    }

    std::string to_string() const {
        std::string s = num.str();
        if (exp > 0) s += "/2^" + std::to_string(exp);
        return s;
    }

    double to_double() const { return num.convert_to<double>() / std::ldexp(1.0, static_cast<int>(exp)); }
};

}  // namespace pachinko
