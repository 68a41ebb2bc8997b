#ifndef RABBIT_CARDINALITY_HPP
#define RABBIT_CARDINALITY_HPP

#include <cstdint>

namespace rabbit {

/// How many output values a query yields per input: exactly one, at most one,
/// or any number. Totally ordered ONE < OPT < SEQ, so the join of two
/// cardinalities is their maximum.
enum class Cardinality : std::uint8_t {
    One = 0,
    Opt = 1,
    Seq = 2,
};

constexpr Cardinality join(Cardinality a, Cardinality b) {
    return a < b ? b : a;
}

constexpr bool leq(Cardinality a, Cardinality b) {
    return a <= b;
}

const char* cardinalityName(Cardinality card);

/// Ascending/descending annotation on sort, group, and rollup keys. This is
/// parse-time metadata, not a runtime type.
enum class SortDirection : std::uint8_t {
    Asc,
    Desc,
};

} // namespace rabbit

#endif
