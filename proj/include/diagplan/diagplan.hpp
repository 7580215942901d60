#pragma once

#include "diagplan/cli.hpp"
#include "diagplan/entropy.hpp"
#include "diagplan/error.hpp"
#include "diagplan/io.hpp"
#include "diagplan/model.hpp"
#include "diagplan/oracle.hpp"
#include "diagplan/partition.hpp"
#include "diagplan/planner.hpp"
