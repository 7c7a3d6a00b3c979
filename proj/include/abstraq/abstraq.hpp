#pragma once

#include "scm.hpp"
#include "graph.hpp"
#include "clustering.hpp"
#include "abstraction.hpp"
#include "tau.hpp"
#include "json_io.hpp"
#include "generate.hpp"
#include "suite.hpp"
