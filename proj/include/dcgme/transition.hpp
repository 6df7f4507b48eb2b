#pragma once

#include <vector>

namespace dcgme {

    // One environment step. Descriptors are attached after the episode ends:
    // `descriptor` is what the trajectory achieved, `target_descriptor` is what
    // the acting policy was asked to achieve (equal for offspring evaluations).
    struct Transition {
        std::vector<double> state;
        std::vector<double> action;
        double reward = 0.0;
        std::vector<double> next_state;
        bool done = false;
        std::vector<double> descriptor;
        std::vector<double> target_descriptor;
    };

} // namespace dcgme
