#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>

#include "qgem/errors.hpp"

namespace qgem::units {

// SI dimension exponents, ordered (m, kg, s, A, K, mol, cd).
using dim7 = std::array<int, 7>;

constexpr dim7 dimensionless{0, 0, 0, 0, 0, 0, 0};
constexpr dim7 length{1, 0, 0, 0, 0, 0, 0};
constexpr dim7 mass{0, 1, 0, 0, 0, 0, 0};
constexpr dim7 time_dim{0, 0, 1, 0, 0, 0, 0};
constexpr dim7 current{0, 0, 0, 1, 0, 0, 0};
constexpr dim7 temperature{0, 0, 0, 0, 1, 0, 0};
constexpr dim7 amount{0, 0, 0, 0, 0, 1, 0};
constexpr dim7 luminous{0, 0, 0, 0, 0, 0, 1};

constexpr dim7 velocity{1, 0, -1, 0, 0, 0, 0};
constexpr dim7 acceleration{1, 0, -2, 0, 0, 0, 0};
constexpr dim7 force{1, 1, -2, 0, 0, 0, 0};
constexpr dim7 energy{2, 1, -2, 0, 0, 0, 0};
constexpr dim7 rate{0, 0, -1, 0, 0, 0, 0};           // Hz, s^-1
constexpr dim7 magnetic_field{0, 1, -2, -1, 0, 0, 0}; // T = kg s^-2 A^-1
constexpr dim7 field_gradient{-1, 1, -2, -1, 0, 0, 0}; // T/m
constexpr dim7 charge{0, 0, 1, 1, 0, 0, 0};           // C = A s
constexpr dim7 dipole_moment{1, 0, 1, 1, 0, 0, 0};    // C m
constexpr dim7 spring_constant{0, 1, -2, 0, 0, 0, 0}; // N/m
constexpr dim7 per_area{-2, 0, 0, 0, 0, 0, 0};
constexpr dim7 angle = dimensionless;                 // rad

constexpr dim7 dim_mul(const dim7& a, const dim7& b) {
    dim7 r{};
    for (int i = 0; i < 7; ++i) r[i] = a[i] + b[i];
    return r;
}
constexpr dim7 dim_div(const dim7& a, const dim7& b) {
    dim7 r{};
    for (int i = 0; i < 7; ++i) r[i] = a[i] - b[i];
    return r;
}
constexpr dim7 dim_pow(const dim7& a, int n) {
    dim7 r{};
    for (int i = 0; i < 7; ++i) r[i] = a[i] * n;
    return r;
}

// A value carrying its SI dimensions. Addition and subtraction require
// matching dimensions; multiplication and division compose them.
struct Quantity {
    double value = 0.0;
    dim7 dims = dimensionless;

    Quantity& operator*=(double s) {
        value *= s;
        return *this;
    }
};

// "m kg^-1 s^4 A^2" style rendering of a dimension vector; "1" when empty.
std::string format_dims(const dim7& d);

Quantity operator*(const Quantity& a, const Quantity& b);
Quantity operator/(const Quantity& a, const Quantity& b);
Quantity operator*(double s, const Quantity& q);
Quantity operator*(const Quantity& q, double s);
Quantity operator/(const Quantity& q, double s);
Quantity operator+(const Quantity& a, const Quantity& b); // throws unit_error on dim mismatch
Quantity operator-(const Quantity& a, const Quantity& b); // throws unit_error on dim mismatch
Quantity qpow(const Quantity& q, int n);
bool operator==(const Quantity& a, const Quantity& b);

// Parse "<number> [unit-expr]", e.g. "5 pm", "1e4 T/m", "2.5 e*um",
// "9.81 m/s^2", "0.1". Unit expressions compose whitelisted symbols with
// '*', '/', and integer '^' exponents; a bare number is dimensionless.
// Locale-independent. Throws unit_error on anything malformed or unknown.
Quantity parse_quantity(std::string_view text);

// Shortest round-trip decimal for the value, followed by base-SI dimensions:
// format_quantity({5e-12, length}) == "5e-12 m". Dimensionless values have
// no suffix.
std::string format_quantity(const Quantity& q);

// Extract the raw SI value after checking dimensions. `what` names the
// parameter in the error message.
double to_si(const Quantity& q, const dim7& expect, std::string_view what = "quantity");

// parse + dimension check in one step.
double parse_si(std::string_view text, const dim7& expect, std::string_view what = "quantity");

struct UnitEntry {
    std::string symbol;
    double factor; // SI value of 1 <symbol>
    dim7 dims;
};

// Every symbol parse_quantity accepts, with its SI conversion factor.
std::span<const UnitEntry> unit_whitelist();

} // namespace qgem::units

namespace qgem {

// CODATA-2018 exact/recommended values, SI.
struct Constants {
    static constexpr double G = 6.67430e-11;        // m^3 kg^-1 s^-2
    static constexpr double hbar = 1.054571817e-34; // J s
    static constexpr double c = 2.99792458e8;       // m s^-1
    static constexpr double eps0 = 8.8541878128e-12; // F m^-1
    static constexpr double mu_B = 9.2740100783e-24; // J T^-1
    static constexpr double k_B = 1.380649e-23;     // J K^-1
    static constexpr double e = 1.602176634e-19;    // C

    // NV-center electron g-factor used as the default throughout; individual
    // call sites accept an override.
    static constexpr double g_e_default = 2.003;
};

struct ConstantEntry {
    std::string_view name;
    double value;
    units::dim7 dims;
    std::string_view note;
};

std::span<const ConstantEntry> constant_table();

} // namespace qgem
