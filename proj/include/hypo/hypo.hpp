#pragma once

#include "hypo/error.hpp"
#include "hypo/log_complex.hpp"
#include "hypo/scalar.hpp"
#include "hypo/problem.hpp"
#include "hypo/ode.hpp"
#include "hypo/asymptotics.hpp"
#include "hypo/wronskian.hpp"
#include "hypo/zeros.hpp"
#include "hypo/growth.hpp"
#include "hypo/singular.hpp"
#include "hypo/io.hpp"
#include "hypo/verify.hpp"
