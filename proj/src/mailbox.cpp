#include "pgas/mailbox.hpp"

namespace pgas {

void Mailbox::deposit(std::uint32_t from, const CtrlTag& tag, std::vector<std::byte> payload) {
  {
    std::lock_guard<std::mutex> lock(mu_);
    slots_[{from, tag}].push_back(std::move(payload));
  }
  cv_.notify_all();
}

std::vector<std::byte> Mailbox::receive(std::uint32_t from, const CtrlTag& tag) {
  std::unique_lock<std::mutex> lock(mu_);
  Key key{from, tag};
  cv_.wait(lock, [&] {
    if (poisoned_) return true;
    auto it = slots_.find(key);
    return it != slots_.end() && !it->second.empty();
  });
  if (poisoned_) throw usage_error(reason_);
  auto it = slots_.find(key);
  std::vector<std::byte> msg = std::move(it->second.front());
  it->second.pop_front();
  if (it->second.empty()) slots_.erase(it);
  return msg;
}

void Mailbox::poison(const std::string& reason) {
  {
    std::lock_guard<std::mutex> lock(mu_);
    if (!poisoned_) {
      poisoned_ = true;
      reason_ = reason;
    }
  }
  cv_.notify_all();
}

bool Mailbox::poisoned() const {
  std::lock_guard<std::mutex> lock(mu_);
  return poisoned_;
}

}  // namespace pgas
