#pragma once

#include "agreement.hpp"
#include "codeset.hpp"
#include "concept_id.hpp"
#include "error.hpp"
#include "hierarchy.hpp"
#include "rational.hpp"
#include "report.hpp"
#include "rf2.hpp"
