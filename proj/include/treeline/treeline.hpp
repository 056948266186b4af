#pragma once

// Umbrella header for the tree-line PCA library.

#include "treeline/binary_tree.hpp"
#include "treeline/brute_force.hpp"
#include "treeline/correspondence.hpp"
#include "treeline/error.hpp"
#include "treeline/io.hpp"
#include "treeline/pc_solver.hpp"
#include "treeline/stats.hpp"
#include "treeline/synth.hpp"
#include "treeline/tree_line.hpp"
