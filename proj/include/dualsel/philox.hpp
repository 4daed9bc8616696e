#pragma once

#include <array>
#include <cstdint>

namespace dualsel
{

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). A block is a
// pure function of (counter, key), so any trial's variates can be produced
// independently of every other trial.
class Philox4x32
{
  public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static constexpr Counter block(Counter ctr, Key key) noexcept
    {
        for (int round = 0; round < 10; ++round)
        {
            if (round > 0)
            {
                key[0] += kWeyl0;
                key[1] += kWeyl1;
            }
            const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
            const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
            ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
                   static_cast<std::uint32_t>(p1),
                   static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
                   static_cast<std::uint32_t>(p0)};
        }
        return ctr;
    }

    // Uniform double on [0, 1) from 53 random bits.
    static constexpr double to_unit(std::uint32_t hi, std::uint32_t lo) noexcept
    {
        const std::uint64_t bits = ((std::uint64_t{hi} << 32) | lo) >> 11;
        return static_cast<double>(bits) * 0x1.0p-53;
    }

  private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85;
};

// Stream of uniforms for one (seed, trial, substream) triple.
class TrialStream
{
  public:
    TrialStream(std::uint64_t seed, std::uint64_t trial_index, std::uint32_t substream) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          trial_lo_(static_cast<std::uint32_t>(trial_index)),
          trial_hi_(static_cast<std::uint32_t>(trial_index >> 32)), substream_(substream)
    {
    }

    double next_uniform() noexcept
    {
        if (used_ == 2)
        {
            buffer_ = Philox4x32::block({block_++, substream_, trial_lo_, trial_hi_}, key_);
            used_ = 0;
        }
        const double u = Philox4x32::to_unit(buffer_[2 * used_], buffer_[2 * used_ + 1]);
        ++used_;
        return u;
    }

  private:
    Philox4x32::Key key_;
    std::uint32_t trial_lo_;
    std::uint32_t trial_hi_;
    std::uint32_t substream_;
    std::uint32_t block_ = 0;
    Philox4x32::Counter buffer_{};
    int used_ = 2;
};

} // namespace dualsel
