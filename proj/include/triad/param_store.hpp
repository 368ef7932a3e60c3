#pragma once

#include <deque>
#include <string>
#include <unordered_map>

#include "triad/matrix.hpp"
#include "triad/modality.hpp"

namespace triad {

/// One named tensor with its gradient accumulator. value and grad always
/// share a shape.
struct ParamEntry {
    std::string component;
    std::string name;
    Attribution attribution = Attribution::Shared;
    Matrix value;
    Matrix grad;

    std::string key() const { return component + "/" + name; }
};

/// Named parameter tensors grouped by component, each attributed to the
/// modality whose gradients it carries. Entries keep registration order and
/// stable addresses (the tape holds pointers into the store for the duration
/// of a step).
class ParamStore {
public:
    ParamEntry& add(std::string component, std::string name, Attribution attribution,
                    Matrix initial);

    bool contains(const std::string& component, const std::string& name) const;
    ParamEntry& at(const std::string& component, const std::string& name);
    const ParamEntry& at(const std::string& component, const std::string& name) const;

    std::size_t count() const { return entries_.size(); }
    std::size_t total_scalars() const;

    ParamEntry& entry(std::size_t i) { return entries_[i]; }
    const ParamEntry& entry(std::size_t i) const { return entries_[i]; }

    /// Must run at the start of every optimization step.
    void zero_grads();

    /// L2 norm over all gradient entries carrying the given attribution.
    double grad_norm(Attribution a) const;

private:
    std::deque<ParamEntry> entries_;
    std::unordered_map<std::string, std::size_t> index_;
};

} // namespace triad
