#pragma once
#include <boost/multiprecision/cpp_int.hpp>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace latcoh {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

// Error taxonomy, mirrored by the CLI exit codes: input_error -> 2,
// property_error -> 1, resource_error -> 3.
struct input_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct property_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct resource_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using IntegerCycle = std::vector<Int>;   // element of L in the E_v basis
using RationalCycle = std::vector<Rat>;  // element of L' in the E_v basis

inline Int numer(const Rat& r) { return boost::multiprecision::numerator(r); }
inline Int denom(const Rat& r) { return boost::multiprecision::denominator(r); }
inline bool is_integer(const Rat& r) { return denom(r) == 1; }

inline Int floor_rat(const Rat& r) {
  Int n = numer(r), d = denom(r);  // d > 0 canonically
  Int q = n / d;
  if (n % d != 0 && n < 0) --q;
  return q;
}

// fractional part in [0,1)
inline Rat frac_rat(const Rat& r) { return r - Rat(floor_rat(r)); }

inline RationalCycle to_rational(const IntegerCycle& l) {
  RationalCycle out(l.size());
  for (size_t i = 0; i < l.size(); ++i) out[i] = Rat(l[i]);
  return out;
}

// Throws unless every entry is integral.
inline IntegerCycle to_integer(const RationalCycle& l, const char* what) {
  IntegerCycle out(l.size());
  for (size_t i = 0; i < l.size(); ++i) {
    if (!is_integer(l[i]))
      throw input_error(std::string(what) + ": entry " + std::to_string(i) +
                        " is not an integer");
    out[i] = numer(l[i]);
  }
  return out;
}

template <class C>
C cyc_add(const C& a, const C& b) {
  C out(a.size());
  for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

template <class C>
C cyc_sub(const C& a, const C& b) {
  C out(a.size());
  for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

inline RationalCycle cyc_add(const RationalCycle& a, const IntegerCycle& b) {
  RationalCycle out(a.size());
  for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] + Rat(b[i]);
  return out;
}

inline RationalCycle cyc_sub(const RationalCycle& a, const IntegerCycle& b) {
  RationalCycle out(a.size());
  for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] - Rat(b[i]);
  return out;
}

template <class C>
bool cyc_le(const C& a, const C& b) {  // componentwise <=
  for (size_t i = 0; i < a.size(); ++i)
    if (a[i] > b[i]) return false;
  return true;
}

template <class C>
bool cyc_is_zero(const C& a) {
  for (auto& x : a)
    if (x != 0) return false;
  return true;
}

template <class C>
bool cyc_nonneg(const C& a) {
  for (auto& x : a)
    if (x < 0) return false;
  return true;
}

inline std::string int_str(const Int& x) { return x.str(); }

inline std::string rat_str(const Rat& r) {
  if (is_integer(r)) return numer(r).str();
  return numer(r).str() + "/" + denom(r).str();
}

inline Rat parse_rat(const std::string& s) {
  auto pos = s.find('/');
  try {
    if (pos == std::string::npos) return Rat(Int(s));
    Int n(s.substr(0, pos)), d(s.substr(pos + 1));
    if (d == 0) throw input_error("rational with zero denominator: " + s);
    return Rat(n, d);
  } catch (const input_error&) {
    throw;
  } catch (const std::exception&) {
    throw input_error("cannot parse rational: '" + s + "'");
  }
}

template <class C>
std::string cyc_str(const C& l) {
  std::string out = "(";
  for (size_t i = 0; i < l.size(); ++i) {
    if (i) out += ",";
    if constexpr (std::is_same_v<typename C::value_type, Rat>)
      out += rat_str(l[i]);
    else
      out += l[i].str();
  }
  return out + ")";
}

// Exact conversion to a machine integer for loop bounds; throws on overflow.
inline long long to_ll(const Int& x, const char* what) {
  if (x > Int(std::numeric_limits<long long>::max()) ||
      x < Int(std::numeric_limits<long long>::min()))
    throw resource_error(std::string(what) + ": value out of machine range");
  return static_cast<long long>(x);
}

}  // namespace latcoh
