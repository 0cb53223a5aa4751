#pragma once

// Walk-spec documents (JSON). A lattice spec:
//
//   {"name": "pm1",
//    "lattice": {"base_step": "1"},
//    "X1":  [[-1, "1/2"], [1, "1/2"]],
//    "X1p": [[-1, "1/2"], [1, "1/2"]],
//    "alpha": "1",
//    "tasks": {"window": 20, "tol": 1e-10, "steps": 1000000, "seed": 1,
//              "replicas": 1, "samples": 100000}}
//
// Values are in real units and must be integer multiples of base_step.
// Probabilities given as strings ("2/3", "0.25") or integers are exact;
// JSON floating-point numbers are taken as float64 input.
//
// A continuous spec replaces "lattice" by "continuous": true, gives each law
// as a family object and must assert the oscillation condition:
//
//   {"continuous": true, "assume_oscillation": true,
//    "X1": {"family": "normal", "mean": 0, "sd": 1}, ...}
//
// Families: normal(mean, sd), uniform(lo, hi), point(value),
// shifted_exponential(components: [{weight, shift, scale}]).

#include "switchwalk/walk.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace switchwalk {

struct TaskOptions {
    Index window = 30;
    double tol = 1e-10;
    Index steps = 1'000'000;
    std::uint64_t seed = 1;
    std::size_t replicas = 1;
    std::uint64_t samples = 100'000;
};

struct SpecFile {
    std::string name;
    WalkSpec spec;
    TaskOptions tasks;
};

// Throws ValidationError for malformed documents and invalid walks.
SpecFile parse_spec(std::string_view text);
SpecFile load_spec(const std::filesystem::path& path);

}  // namespace switchwalk
