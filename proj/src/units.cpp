#include "qgem/units.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <vector>

namespace qgem::units {

namespace {

std::string dims_to_string(const dim7& d) {
    static constexpr std::string_view base[7] = {"m", "kg", "s", "A", "K", "mol", "cd"};
    std::string out;
    for (int i = 0; i < 7; ++i) {
        if (d[i] == 0) continue;
        if (!out.empty()) out += ' ';
        out += base[i];
        if (d[i] != 1) {
            out += '^';
            out += std::to_string(d[i]);
        }
    }
    return out.empty() ? std::string("1") : out;
}

std::vector<UnitEntry> build_whitelist() {
    std::vector<UnitEntry> table;
    table.push_back({std::string("1"), 1.0, dimensionless});
    table.push_back({std::string("rad"), 1.0, angle});
    table.push_back({std::string("deg"), M_PI / 180.0, angle});
    table.push_back({std::string("e"), Constants::e, charge});
    table.push_back({std::string("A"), 1.0, current});
    table.push_back({std::string("mol"), 1.0, amount});
    table.push_back({std::string("cd"), 1.0, luminous});

    struct Base {
        std::string_view symbol;
        double factor;
        dim7 dims;
    };
    // Prefixable symbols. Mass is built on the gram so "kg" falls out of the
    // prefix loop like everything else.
    static constexpr Base bases[] = {
        {"m", 1.0, length},          {"g", 1e-3, mass},
        {"s", 1.0, time_dim},        {"K", 1.0, temperature},
        {"T", 1.0, magnetic_field},  {"Hz", 1.0, rate},
        {"N", 1.0, force},           {"J", 1.0, energy},
        {"C", 1.0, charge},          {"eV", Constants::e, energy},
        {"rad", 1.0, angle},
    };
    struct Prefix {
        std::string_view symbol;
        double factor;
    };
    static constexpr Prefix prefixes[] = {
        {"", 1.0},     {"G", 1e9},   {"M", 1e6},   {"k", 1e3},  {"c", 1e-2},
        {"m", 1e-3},   {"u", 1e-6},  {"n", 1e-9},  {"p", 1e-12},
        {"f", 1e-15},  {"a", 1e-18}, {"z", 1e-21},
    };
    for (const auto& b : bases) {
        for (const auto& p : prefixes) {
            if (p.symbol.empty() && b.symbol == "rad") continue; // bare rad added above
            table.push_back({std::string(p.symbol) + std::string(b.symbol),
                             p.factor * b.factor, b.dims});
        }
    }
    return table;
}

const std::vector<UnitEntry>& whitelist() {
    static const std::vector<UnitEntry> table = build_whitelist();
    return table;
}

const UnitEntry* lookup(std::string_view symbol) {
    for (const auto& entry : whitelist())
        if (entry.symbol == symbol) return &entry;
    return nullptr;
}

void skip_ws(std::string_view& s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
}

// term := symbol ['^' ['-'] digits]
Quantity parse_term(std::string_view& s, std::string_view full) {
    skip_ws(s);
    if (s.empty()) throw unit_error("unit expression ends where a symbol was expected: '" + std::string(full) + "'");
    Quantity q{1.0, dimensionless};
    if (s.front() == '1') {
        s.remove_prefix(1);
    } else {
        size_t n = 0;
        while (n < s.size() && std::isalpha(static_cast<unsigned char>(s[n]))) ++n;
        if (n == 0)
            throw unit_error("expected a unit symbol in '" + std::string(full) + "'");
        const UnitEntry* entry = lookup(s.substr(0, n));
        if (!entry)
            throw unit_error("unknown unit '" + std::string(s.substr(0, n)) + "' in '" + std::string(full) + "'");
        q = Quantity{entry->factor, entry->dims};
        s.remove_prefix(n);
    }
    skip_ws(s);
    if (!s.empty() && s.front() == '^') {
        s.remove_prefix(1);
        skip_ws(s);
        int exp = 0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), exp);
        if (ec != std::errc{})
            throw unit_error("bad exponent in '" + std::string(full) + "'");
        s.remove_prefix(static_cast<size_t>(ptr - s.data()));
        q = qpow(q, exp);
    }
    return q;
}

// Juxtaposition multiplies ("m s^-2" == "m*s^-2"), matching SI product
// notation, so format_quantity output always parses back.
Quantity parse_unit_expr(std::string_view s, std::string_view full) {
    Quantity q = parse_term(s, full);
    skip_ws(s);
    while (!s.empty()) {
        char op = '*';
        if (s.front() == '*' || s.front() == '/') {
            op = s.front();
            s.remove_prefix(1);
        }
        Quantity t = parse_term(s, full);
        q = (op == '*') ? q * t : q / t;
        skip_ws(s);
    }
    return q;
}

} // namespace

std::string format_dims(const dim7& d) { return dims_to_string(d); }

Quantity operator*(const Quantity& a, const Quantity& b) {
    return {a.value * b.value, dim_mul(a.dims, b.dims)};
}
Quantity operator/(const Quantity& a, const Quantity& b) {
    return {a.value / b.value, dim_div(a.dims, b.dims)};
}
Quantity operator*(double s, const Quantity& q) { return {s * q.value, q.dims}; }
Quantity operator*(const Quantity& q, double s) { return {s * q.value, q.dims}; }
Quantity operator/(const Quantity& q, double s) { return {q.value / s, q.dims}; }

Quantity operator+(const Quantity& a, const Quantity& b) {
    if (a.dims != b.dims)
        throw unit_error("cannot add " + dims_to_string(a.dims) + " to " + dims_to_string(b.dims));
    return {a.value + b.value, a.dims};
}
Quantity operator-(const Quantity& a, const Quantity& b) {
    if (a.dims != b.dims)
        throw unit_error("cannot subtract " + dims_to_string(b.dims) + " from " + dims_to_string(a.dims));
    return {a.value - b.value, a.dims};
}
Quantity qpow(const Quantity& q, int n) {
    return {std::pow(q.value, n), dim_pow(q.dims, n)};
}
bool operator==(const Quantity& a, const Quantity& b) {
    return a.value == b.value && a.dims == b.dims;
}

Quantity parse_quantity(std::string_view text) {
    std::string_view s = text;
    skip_ws(s);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    if (s.empty()) throw unit_error("empty quantity");

    double value = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr == s.data())
        throw unit_error("quantity must start with a number: '" + std::string(text) + "'");
    if (!std::isfinite(value))
        throw unit_error("quantity must be finite: '" + std::string(text) + "'");
    s.remove_prefix(static_cast<size_t>(ptr - s.data()));
    skip_ws(s);
    if (s.empty()) return {value, dimensionless};

    Quantity unit = parse_unit_expr(s, text);
    return {value * unit.value, unit.dims};
}

std::string format_quantity(const Quantity& q) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, q.value);
    std::string out(buf, ptr);
    if (q.dims != dimensionless) {
        out += ' ';
        out += dims_to_string(q.dims);
    }
    return out;
}

double to_si(const Quantity& q, const dim7& expect, std::string_view what) {
    if (q.dims != expect)
        throw unit_error(std::string(what) + ": expected dimensions " + dims_to_string(expect) +
                         ", got " + dims_to_string(q.dims));
    return q.value;
}

double parse_si(std::string_view text, const dim7& expect, std::string_view what) {
    return to_si(parse_quantity(text), expect, what);
}

std::span<const UnitEntry> unit_whitelist() { return whitelist(); }

} // namespace qgem::units

namespace qgem {

std::span<const ConstantEntry> constant_table() {
    using namespace units;
    static const ConstantEntry table[] = {
        {"G", Constants::G, {3, -1, -2, 0, 0, 0, 0}, "Newtonian gravitation"},
        {"hbar", Constants::hbar, {2, 1, -1, 0, 0, 0, 0}, "reduced Planck"},
        {"c", Constants::c, velocity, "speed of light"},
        {"eps0", Constants::eps0, {-3, -1, 4, 2, 0, 0, 0}, "vacuum permittivity"},
        {"mu_B", Constants::mu_B, {2, 0, 0, 1, 0, 0, 0}, "Bohr magneton"},
        {"k_B", Constants::k_B, {2, 1, -2, 0, -1, 0, 0}, "Boltzmann"},
        {"e", Constants::e, charge, "elementary charge"},
        {"g_e_default", Constants::g_e_default, dimensionless, "electron g-factor default"},
    };
    return table;
}

} // namespace qgem
