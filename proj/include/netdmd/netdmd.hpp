#ifndef NETDMD_NETDMD_HPP
#define NETDMD_NETDMD_HPP

#include "netdmd/bench.hpp"
#include "netdmd/dmdcore.hpp"
#include "netdmd/error.hpp"
#include "netdmd/io.hpp"
#include "netdmd/netdmdc.hpp"
#include "netdmd/numkernel.hpp"
#include "netdmd/rng.hpp"
#include "netdmd/sysmodel.hpp"
#include "netdmd/topology.hpp"

#endif  // NETDMD_NETDMD_HPP
