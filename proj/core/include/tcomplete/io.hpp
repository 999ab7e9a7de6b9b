#pragma once

#include <iosfwd>
#include <string>

#include "tcomplete/observations.hpp"
#include "tcomplete/tensor.hpp"

namespace tcomplete {

// Tensor text format: a header line "d1 d2 d3" followed by the d1*d2*d3 values
// in storage order (i3 fastest), whitespace separated, 17 significant digits.
//
// Observation text format: a header line "d1 d2 d3 n" followed by n lines
// "i1 i2 i3 value" with one-based indices.
//
// Readers throw std::runtime_error on malformed input.

void write_tensor(std::ostream& out, const Tensor3& t);
Tensor3 read_tensor(std::istream& in);

void write_observations(std::ostream& out, const ObservationSet& obs);
ObservationSet read_observations(std::istream& in);

Tensor3 load_tensor(const std::string& path);
void save_tensor(const std::string& path, const Tensor3& t);
ObservationSet load_observations(const std::string& path);
void save_observations(const std::string& path, const ObservationSet& obs);

}  // namespace tcomplete
