#pragma once

#include "core.hpp"
#include "decide.hpp"
#include "errors.hpp"
#include "io.hpp"
#include "lps.hpp"
#include "smallsol.hpp"
#include "vector.hpp"
#include "woca.hpp"
