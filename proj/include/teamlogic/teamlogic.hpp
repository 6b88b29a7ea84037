#pragma once

// Umbrella header for the whole library.

#include "errors.hpp"
#include "structure.hpp"
#include "formula.hpp"
#include "parser.hpp"
#include "tarski.hpp"
#include "dependency.hpp"
#include "dependency_checks.hpp"
#include "teameval.hpp"
#include "classes.hpp"
#include "ulogic.hpp"
#include "harness.hpp"
