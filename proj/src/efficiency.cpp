// SPDX-License-Identifier: Apache-2.0
#include "spk/efficiency.hpp"

#include <limits>

#include "spk/error.hpp"

namespace spk {

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
    if (a > std::numeric_limits<std::uint64_t>::max() - b) {
        throw CountingError("operation counter overflow in addition");
    }
    return a + b;
}

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
    if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) {
        throw CountingError("operation counter overflow in multiplication");
    }
    return a * b;
}

std::uint64_t OpCounts::total() const { return checked_add(spike_accumulates, dense_macs); }

OpCounts& OpCounts::operator+=(const OpCounts& other) {
    spike_accumulates = checked_add(spike_accumulates, other.spike_accumulates);
    dense_macs = checked_add(dense_macs, other.dense_macs);
    return *this;
}

SopLedger::SopLedger(const SopLedger& other) {
    std::lock_guard lock(other.mu_);
    entries_ = other.entries_;
}

SopLedger& SopLedger::operator=(const SopLedger& other) {
    if (this == &other) return *this;
    std::scoped_lock lock(mu_, other.mu_);
    entries_ = other.entries_;
    return *this;
}

void SopLedger::credit(std::string_view label, OpCounts counts) {
    std::lock_guard lock(mu_);
    auto it = entries_.find(label);
    if (it == entries_.end()) {
        entries_.emplace(std::string(label), counts);
    } else {
        it->second += counts;
    }
}

void SopLedger::merge(const SopLedger& other) {
    if (this == &other) {
        auto copy = other.entries();
        for (const auto& [label, counts] : copy) credit(label, counts);
        return;
    }
    std::scoped_lock lock(mu_, other.mu_);
    for (const auto& [label, counts] : other.entries_) {
        auto it = entries_.find(label);
        if (it == entries_.end()) {
            entries_.emplace(label, counts);
        } else {
            it->second += counts;
        }
    }
}

OpCounts SopLedger::total() const { return total_with_prefix(""); }

OpCounts SopLedger::total_with_prefix(std::string_view prefix) const {
    std::lock_guard lock(mu_);
    OpCounts sum;
    for (const auto& [label, counts] : entries_) {
        if (std::string_view(label).starts_with(prefix)) sum += counts;
    }
    return sum;
}

std::map<std::string, OpCounts> SopLedger::entries() const {
    std::lock_guard lock(mu_);
    return {entries_.begin(), entries_.end()};
}

bool SopLedger::empty() const {
    std::lock_guard lock(mu_);
    return entries_.empty();
}

std::uint64_t count_linear(std::uint64_t nnz_in, std::uint64_t fan_out) { return checked_mul(nnz_in, fan_out); }

OpCounts count_attention(std::uint64_t nnz_q, std::uint64_t n_tokens, std::uint64_t d, AttentionCounting mode,
                         std::uint64_t nnz_a) {
    OpCounts c;
    c.spike_accumulates = checked_mul(nnz_q, n_tokens);
    c.dense_macs = mode == AttentionCounting::structural ? checked_mul(checked_mul(n_tokens, n_tokens), d)
                                                         : checked_mul(nnz_a, d);
    return c;
}

double energy_mj(const OpCounts& counts, const EnergyModel& model) {
    if (!(model.pj_per_op > 0.0)) {
        throw ArgumentError("energy per operation must be positive");
    }
    // 1 pJ = 1e-9 mJ
    return static_cast<double>(counts.total()) * model.pj_per_op * 1e-9;
}

double energy_mj(const SopLedger& ledger, const EnergyModel& model) { return energy_mj(ledger.total(), model); }

double reduction_percent(std::uint64_t base, std::uint64_t reduced) {
    if (base == 0) {
        throw ArgumentError("reduction_percent requires a positive base count");
    }
    return 100.0 * (static_cast<double>(base) - static_cast<double>(reduced)) / static_cast<double>(base);
}

}  // namespace spk
