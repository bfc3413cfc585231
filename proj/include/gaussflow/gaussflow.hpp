#pragma once

#include "gaussflow/error.hpp"
#include "gaussflow/grassmann.hpp"
#include "gaussflow/random.hpp"
#include "gaussflow/omega.hpp"
#include "gaussflow/selfdual.hpp"
#include "gaussflow/immersion.hpp"
#include "gaussflow/geometry.hpp"
#include "gaussflow/flow.hpp"
#include "gaussflow/diagnostics.hpp"
