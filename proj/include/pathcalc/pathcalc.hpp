#pragma once

/**
 * @file pathcalc.hpp
 * @brief Umbrella header: pathwise functional Ito calculus on cadlag paths.
 */

#include "builtins.hpp"
#include "csv.hpp"
#include "functional.hpp"
#include "identities.hpp"
#include "integrate.hpp"
#include "partition.hpp"
#include "path.hpp"
#include "quadvar.hpp"
#include "report.hpp"
#include "skorokhod.hpp"
#include "spec_parse.hpp"
#include "stopped.hpp"
#include "types.hpp"
