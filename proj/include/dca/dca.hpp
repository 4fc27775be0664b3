#pragma once

#include "dca/alphabet.hpp"
#include "dca/binary.hpp"
#include "dca/configuration.hpp"
#include "dca/csv.hpp"
#include "dca/discrete.hpp"
#include "dca/errors.hpp"
#include "dca/experiment.hpp"
#include "dca/fdcheck.hpp"
#include "dca/grad.hpp"
#include "dca/optim.hpp"
#include "dca/pattern.hpp"
#include "dca/pca.hpp"
#include "dca/pgm.hpp"
#include "dca/rng.hpp"
#include "dca/rule_io.hpp"
#include "dca/rule_table.hpp"
#include "dca/step.hpp"
#include "dca/topology.hpp"
#include "dca/version.hpp"
