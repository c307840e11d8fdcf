#ifndef HDS_ERRORS_HPP
#define HDS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace hds {

// Box would not fit under the configured vertex cap.
class DimensionTooLarge : public std::length_error {
 public:
  using std::length_error::length_error;
};

// Vertex id is the sink, out of range, or a point lies outside the box.
class InvalidVertex : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class IllegalToppling : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class NotStable : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class MalformedPath : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class IncompatibleTables : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class TooFewSamples : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace hds

#endif  // HDS_ERRORS_HPP
