#pragma once

#include <compare>
#include <cstdint>
#include <string>

#include "ecsim/error.hpp"

namespace ecsim::ledger {

/// Whole millions of USD-equivalent. Overflow is an error rather than wraparound.
class Money {
public:
    constexpr Money() = default;
    constexpr explicit Money(std::int64_t millions) : v_(millions) {}

    constexpr std::int64_t millions() const { return v_; }

    friend Money operator+(Money a, Money b) {
        std::int64_t r;
        if (__builtin_add_overflow(a.v_, b.v_, &r)) throw DomainError("money overflow");
        return Money(r);
    }
    friend Money operator-(Money a, Money b) {
        std::int64_t r;
        if (__builtin_sub_overflow(a.v_, b.v_, &r)) throw DomainError("money overflow");
        return Money(r);
    }
    Money operator-() const { return Money(0) - *this; }
    Money& operator+=(Money o) { return *this = *this + o; }
    Money& operator-=(Money o) { return *this = *this - o; }

    friend constexpr auto operator<=>(Money, Money) = default;

    std::string str() const { return std::to_string(v_); }

private:
    std::int64_t v_ = 0;
};

inline Money min(Money a, Money b) { return a < b ? a : b; }

}  // namespace ecsim::ledger
