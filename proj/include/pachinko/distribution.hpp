#pragma once

// Output distributions over half-unit grid columns, plus the mass absorbed
// at rest sites.  Rest mass is kept out of the column map because the
// centered-moment identity is stated over drop columns only.

#include "pachinko/dyadic.hpp"

#include <iostream>
#include <map>
#include <sstream>
#include <string>

namespace pachinko {

class Distribution {
  public:
    using Entries = std::map<long long, Dyadic>;

    Distribution() = default;

    void add(long long column, const Dyadic& mass) {
        if (mass.is_zero()) return;
        auto it = entries_.find(column);
        if (it == entries_.end())
            entries_.emplace(column, mass);
        else
            it->second += mass;
    }
    void add_rest(const Dyadic& mass) { rest_ += mass; }

    const Entries& entries() const { return entries_; }
    const Dyadic& rest_mass() const { return rest_; }

    Dyadic at(long long column) const {
        auto it = entries_.find(column);
        return it == entries_.end() ? Dyadic::zero() : it->second;
    }

    Dyadic total() const {
        Dyadic t = rest_;
        for (const auto& [c, m] : entries_) t += m;
        return t;
    }
    bool is_complete() const { return total().is_one(); }

    std::size_t output_count() const { return entries_.size(); }

    friend bool operator==(const Distribution& a, const Distribution& b) = default;

    // Translate every column by delta (used when composing layouts).
    Distribution shifted(long long delta) const {
        Distribution d;
        for (const auto& [c, m] : entries_) d.add(c + delta, m);
        d.rest_ = rest_;
        return d;
    }

    std::string to_text() const {
        std::ostringstream os;
        for (const auto& [c, m] : entries_) os << c << ": " << m.to_binary() << "\n";
        if (!rest_.is_zero()) os << "rest: " << rest_.to_binary() << "\n";
        return os.str();
    }

    static Distribution from_text(std::istream& in) {
        Distribution d;
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            auto colon = line.find(':');
            if (line.empty()) continue;
            if (colon == std::string::npos)
                throw ParseError("distribution line " + std::to_string(lineno) + ": missing ':'");
            std::string key = line.substr(0, colon);
            std::string val = line.substr(colon + 1);
            while (!val.empty() && val.front() == ' ') val.erase(val.begin());
            while (!key.empty() && key.back() == ' ') key.pop_back();
            Dyadic mass = parse_binary(val);
            if (key == "rest") {
                d.rest_ += mass;
                continue;
            }
            std::size_t pos = 0;
            long long col = 0;
            try {
                col = std::stoll(key, &pos);
            } catch (const std::exception&) {
                throw ParseError("distribution line " + std::to_string(lineno) + ": bad column '" + key + "'");
            }
            if (pos != key.size())
                throw ParseError("distribution line " + std::to_string(lineno) + ": bad column '" + key + "'");
            d.add(col, mass);
        }
        return d;
    }

  private:
    Entries entries_;
    Dyadic rest_;
};

// Exact Σ column·mass over drop columns; rest mass is excluded and callers
// must decide whether the identity even applies when rest mass is present.
inline Moment first_moment(const Distribution& d) {
    BigInt acc = 0;
    unsigned e = 0;
    for (const auto& [c, m] : d.entries()) e = std::max(e, m.exponent());
    for (const auto& [c, m] : d.entries()) acc += BigInt(c) * (m.numerator() << (e - m.exponent()));
    return Moment{acc, e};
}

// Max absolute per-column difference; absent columns read as zero.
inline Dyadic statistical_distance(const Distribution& a, const Distribution& b) {
    Dyadic best;
    auto ia = a.entries().begin();
    auto ib = b.entries().begin();
    while (ia != a.entries().end() || ib != b.entries().end()) {
        Dyadic diff;
        if (ib == b.entries().end() || (ia != a.entries().end() && ia->first < ib->first)) {
            diff = ia->second;
            ++ia;
        } else if (ia == a.entries().end() || ib->first < ia->first) {
            diff = ib->second;
            ++ib;
        } else {
            diff = Dyadic::abs_diff(ia->second, ib->second);
            ++ia;
            ++ib;
        }
        if (diff > best) best = diff;
    }
    return best;
}

}  // namespace pachinko
