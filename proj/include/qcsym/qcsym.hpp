#pragma once

#include "expr.hpp"
#include "printer.hpp"
#include "parser.hpp"
#include "calculus.hpp"
#include "ratfunc.hpp"
#include "evaluate.hpp"
#include "zero_test.hpp"
#include "verification.hpp"
#include "jet.hpp"
#include "detsys.hpp"
#include "numeric.hpp"
#include "reduction.hpp"
#include "report.hpp"
#include "commands.hpp"
