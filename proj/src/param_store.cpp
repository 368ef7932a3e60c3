#include "triad/param_store.hpp"

#include <cmath>

namespace triad {

ParamEntry& ParamStore::add(std::string component, std::string name, Attribution attribution,
                            Matrix initial) {
    ParamEntry e;
    e.component = std::move(component);
    e.name = std::move(name);
    e.attribution = attribution;
    e.grad = Matrix(initial.rows(), initial.cols());
    e.value = std::move(initial);
    const std::string key = e.key();
    if (index_.count(key) != 0) {
        throw InvalidConfig("duplicate parameter: " + key);
    }
    entries_.push_back(std::move(e));
    index_[key] = entries_.size() - 1;
    return entries_.back();
}

bool ParamStore::contains(const std::string& component, const std::string& name) const {
    return index_.count(component + "/" + name) != 0;
}

ParamEntry& ParamStore::at(const std::string& component, const std::string& name) {
    auto it = index_.find(component + "/" + name);
    if (it == index_.end()) {
        throw InvalidConfig("unknown parameter: " + component + "/" + name);
    }
    return entries_[it->second];
}

const ParamEntry& ParamStore::at(const std::string& component, const std::string& name) const {
    auto it = index_.find(component + "/" + name);
    if (it == index_.end()) {
        throw InvalidConfig("unknown parameter: " + component + "/" + name);
    }
    return entries_[it->second];
}

std::size_t ParamStore::total_scalars() const {
    std::size_t n = 0;
    for (const auto& e : entries_) {
        n += e.value.size();
    }
    return n;
}

void ParamStore::zero_grads() {
    for (auto& e : entries_) {
        e.grad.fill(0.0);
    }
}

double ParamStore::grad_norm(Attribution a) const {
    double s = 0.0;
    for (const auto& e : entries_) {
        if (e.attribution != a) continue;
        for (double g : e.grad.flat()) {
            s += g * g;
        }
    }
    return std::sqrt(s);
}

} // namespace triad
