#include "desklab/sut/factory.hpp"

#include "desklab/sut/chain.hpp"
#include "desklab/sut/frost_services.hpp"
#include "desklab/sut/pbs.hpp"

namespace desklab::sut {

harness::ServiceFactory builtin_factory() {
  return [](const config::ServiceBinding& b, const config::ScenarioSpec& spec) -> std::unique_ptr<harness::Service> {
    switch (b.service) {
      case config::ServiceKind::frost_coordinator:
      case config::ServiceKind::frost_signer:
      case config::ServiceKind::frost_client:
        return make_frost_service(b, spec);
      case config::ServiceKind::pbs_client:
      case config::ServiceKind::pbs_builder:
      case config::ServiceKind::pbs_relay:
        return pbs::make_service(b, spec);
      case config::ServiceKind::chain_relay:
      case config::ServiceKind::chain_participation:
      case config::ServiceKind::chain_nonparticipation:
      case config::ServiceKind::chain_client:
        return chain::make_service(b, spec);
    }
    return nullptr;
  };
}

}  // namespace desklab::sut
