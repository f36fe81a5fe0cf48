#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "grnn/errors.hpp"

namespace grnn {

// --- integer sequence oracles -------------------------------------------------

// F(1) = F(2) = 1. ValueError for n = 0, Overflow past the uint64 range (n > 93).
std::uint64_t fibonacci_value(unsigned n);

// Steps until the halting value 1 is reached; 0 for n = 1. ValueError for
// n = 0, Overflow when 3n+1 leaves uint64 range or after 10^6 steps.
std::uint64_t collatz_steps(std::uint64_t n);

// Survivors of the sieve that repeatedly deletes every k-th remaining number,
// k taken from the sequence itself; starts from the odd numbers.
std::vector<std::uint64_t> lucky_numbers(std::uint64_t limit);

std::vector<std::uint64_t> primes_upto(std::uint64_t limit);
bool is_prime(std::uint64_t n);

bool is_fibonacci(std::uint64_t n);

// Length of the repeating block in the decimal expansion of 1/n
// (0 when the expansion terminates). ValueError for n = 0.
std::uint64_t cycle_length(std::uint64_t n);

// patterns[bit][position] = bit `bit` of counts[position].
// Overflow when any count needs more than `bit_width` bits.
std::vector<std::vector<std::uint8_t>> step_counts_to_bit_patterns(
    std::span<const std::uint64_t> counts, unsigned bit_width);

// --- task descriptions ----------------------------------------------------------

// Numeric task: the expression of a solving gene at input code i, relative to
// the base code, must be within epsilon of expected_fold[i].
struct CalculationTask {
    std::map<int, double> expected_fold;
    double epsilon = 0.01;
};

// Membership task: target codes must sit strictly above the gene's own mean,
// all other codes at or below it.
struct ClassificationTask {
    std::set<int> target_codes;
};

// Bit-encoded numeric task: one gene per bit plane; patterns[bit][position]
// over the sorted input codes.
struct BinaryTask {
    std::vector<std::vector<std::uint8_t>> bit_patterns;
    std::vector<std::uint64_t> expected_values;  // per input code, for decoding checks
};

struct TaskSpec {
    std::string name;
    std::variant<CalculationTask, ClassificationTask, BinaryTask> detail;

    bool is_calculation() const { return std::holds_alternative<CalculationTask>(detail); }
    bool is_classification() const { return std::holds_alternative<ClassificationTask>(detail); }
    bool is_binary() const { return std::holds_alternative<BinaryTask>(detail); }
    const CalculationTask& calculation() const { return std::get<CalculationTask>(detail); }
    const ClassificationTask& classification() const { return std::get<ClassificationTask>(detail); }
    const BinaryTask& binary() const { return std::get<BinaryTask>(detail); }
};

// Fold map for "multiply by m": code i -> m * i.
CalculationTask multiplication_spec(double m, std::span<const int> codes, double epsilon = 0.01);

// Built-in tasks: fibonacci, mult2..mult5 (calculation); collatz (binary,
// 5 bit planes); lucky, prime, fib-member, decimal-cycle (classification).
// Codes default to 1..6 for fibonacci and 1..7 otherwise. SpecError on
// unknown names or codes a task cannot cover.
TaskSpec make_task(const std::string& name);
TaskSpec make_task(const std::string& name, std::span<const int> codes);
std::vector<std::string> builtin_task_names();

// Expected output column for a built-in task over its codes (what the task
// computes for each input), independent of any dataset.
std::vector<std::uint64_t> expected_outputs(const std::string& name, std::span<const int> codes);

}  // namespace grnn
