#pragma once

#include "simosec/autoenc.hpp"
#include "simosec/channel.hpp"
#include "simosec/config.hpp"
#include "simosec/csv.hpp"
#include "simosec/equalize.hpp"
#include "simosec/impair.hpp"
#include "simosec/iq.hpp"
#include "simosec/modem.hpp"
#include "simosec/net.hpp"
#include "simosec/rng.hpp"
#include "simosec/svg.hpp"
#include "simosec/sweep.hpp"
