#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "speechlab/classifiers.hpp"

namespace speechlab::classifiers::detail {

// Max-shifted softmax; -inf entries map to 0.
std::vector<double> softmax(std::span<const double> logits);

// Index of the largest value, lowest index on ties.
std::size_t argmax(std::span<const double> values);

// Validates the dataset and throws TrainingError when one class is present.
void require_trainable(const Dataset& data);

}  // namespace speechlab::classifiers::detail
