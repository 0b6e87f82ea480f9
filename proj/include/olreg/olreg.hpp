#pragma once

#include "olreg/adversary.hpp"
#include "olreg/bounds.hpp"
#include "olreg/complexity.hpp"
#include "olreg/core.hpp"
#include "olreg/experiments.hpp"
#include "olreg/forecasters.hpp"
#include "olreg/function_class.hpp"
#include "olreg/io.hpp"
#include "olreg/parallel.hpp"
#include "olreg/protocol.hpp"
#include "olreg/tree.hpp"
