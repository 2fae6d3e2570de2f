#include "relhyp/types.hpp"
