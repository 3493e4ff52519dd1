#pragma once

#include "qthermo/errors.hpp"
#include "qthermo/opcore.hpp"
#include "qthermo/gkls.hpp"
#include "qthermo/thermo.hpp"
#include "qthermo/engine.hpp"
#include "qthermo/models/levels.hpp"
#include "qthermo/models/pv.hpp"
#include "qthermo/models/chem.hpp"
#include "qthermo/models/birth_death.hpp"
