#pragma once

#include "budgetsvm/config.hpp"
#include "budgetsvm/data.hpp"
#include "budgetsvm/diagnostics.hpp"
#include "budgetsvm/errors.hpp"
#include "budgetsvm/golden_section.hpp"
#include "budgetsvm/kernel.hpp"
#include "budgetsvm/merge.hpp"
#include "budgetsvm/model.hpp"
#include "budgetsvm/random.hpp"
#include "budgetsvm/sgd.hpp"
