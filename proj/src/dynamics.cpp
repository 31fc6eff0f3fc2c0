#include "hardball/dynamics.hpp"

namespace hardball {

template class Engine<double>;
template class Engine<Extended>;
template class Engine<Deep>;

}  // namespace hardball
