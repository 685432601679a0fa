// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <string_view>

namespace spk {

// Operation counts for one layer. Spike accumulates are additions triggered by a
// binary input; dense MACs are multiply-accumulates on real- or integer-valued inputs.
struct OpCounts {
    std::uint64_t spike_accumulates = 0;
    std::uint64_t dense_macs = 0;

    std::uint64_t total() const;
    OpCounts& operator+=(const OpCounts& other);
    friend bool operator==(const OpCounts&, const OpCounts&) = default;
};

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b);
std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b);

// Per-layer operation ledger. Credits and merges are serialized internally, so one
// ledger may be shared by concurrent producers; merge is entrywise addition.
class SopLedger {
public:
    SopLedger() = default;
    SopLedger(const SopLedger& other);
    SopLedger& operator=(const SopLedger& other);

    void credit(std::string_view label, OpCounts counts);
    void credit_accumulates(std::string_view label, std::uint64_t n) { credit(label, {n, 0}); }
    void credit_macs(std::string_view label, std::uint64_t n) { credit(label, {0, n}); }
    void merge(const SopLedger& other);

    OpCounts total() const;
    // Sum over entries whose label starts with `prefix`.
    OpCounts total_with_prefix(std::string_view prefix) const;
    std::map<std::string, OpCounts> entries() const;
    bool empty() const;

    friend bool operator==(const SopLedger& a, const SopLedger& b) { return a.entries() == b.entries(); }

private:
    mutable std::mutex mu_;
    std::map<std::string, OpCounts, std::less<>> entries_;
};

struct EnergyModel {
    double pj_per_op = 0.9;
};

enum class AttentionCounting {
    structural,      // A.V charged N*N*d MACs regardless of the values of A
    data_dependent,  // A.V charged nnz(A)*d MACs
};

// nnz_in * fan_out spike accumulates.
std::uint64_t count_linear(std::uint64_t nnz_in, std::uint64_t fan_out);

// Q K^T: nnz_q * n_tokens accumulates. A V: dense MACs, see AttentionCounting.
OpCounts count_attention(std::uint64_t nnz_q, std::uint64_t n_tokens, std::uint64_t d,
                         AttentionCounting mode = AttentionCounting::structural, std::uint64_t nnz_a = 0);

double energy_mj(const OpCounts& counts, const EnergyModel& model = {});
double energy_mj(const SopLedger& ledger, const EnergyModel& model = {});

// 100 * (base - reduced) / base.
double reduction_percent(std::uint64_t base, std::uint64_t reduced);

}  // namespace spk
