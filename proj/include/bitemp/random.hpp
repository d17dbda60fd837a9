#pragma once

#include <array>
#include <cstdint>

namespace bitemp {

// Philox4x32-10 block function (Salmon et al., Random123).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key);

// Purposes separate streams drawn from one seed so that, e.g., the valid-time
// and transaction-time simulations of path 17 never share random numbers.
enum class Purpose : std::uint32_t {
    valid_path = 1,
    timeline = 2,
    reserve_valid = 3,
    reserve_transaction = 4,
    origin = 5,
    backtest = 6,
    conditional = 7,
};

// Counter-based stream keyed by (seed, purpose, index). Draws depend only on
// the key and the draw count, never on which thread evaluates them.
class RngStream {
public:
    RngStream(std::uint64_t seed, Purpose purpose, std::uint64_t index);

    std::uint32_t next_u32();
    double uniform();      // in (0, 1)
    double exponential();  // rate 1

private:
    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 4> ctr_;
    std::array<std::uint32_t, 4> buf_{};
    int used_ = 4;
};

}  // namespace bitemp
