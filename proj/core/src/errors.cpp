#include "pension/errors.hpp"
