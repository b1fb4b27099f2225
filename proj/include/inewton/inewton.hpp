#pragma once

#include "inewton/diagnostics.hpp"
#include "inewton/engine.hpp"
#include "inewton/gauss_newton.hpp"
#include "inewton/io.hpp"
#include "inewton/least_squares.hpp"
#include "inewton/linalg.hpp"
#include "inewton/problem.hpp"
#include "inewton/run.hpp"
#include "inewton/stepsize.hpp"
#include "inewton/theory.hpp"
