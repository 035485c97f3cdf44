#include "qmpi/communicator.hpp"

namespace qmpi {

Communicator::Communicator(int rank, int size, Fabric& fabric)
    : rank_(rank), size_(size), fabric_(fabric) {
    fabric_.register_communicator(rank, size);
    for (int peer = 0; peer < size; ++peer) {
        if (peer == rank || !fabric_.connected(rank, peer)) continue;
        epr_table_[peer] = fabric_.socket(rank, peer);
    }
}

void Communicator::check_rank_arg(int value, const char* what) const {
    if (value < 0 || value >= size_) {
        throw Error(ErrorCode::UnknownNode, std::string(what) + " " + std::to_string(value) +
                                                " is outside 0.." + std::to_string(size_ - 1));
    }
}

void Communicator::flush() { fabric_.flush(rank_); }

void Communicator::barrier() { fabric_.barrier(rank_); }

void Communicator::csend(int to, ClassicalMessage message) {
    fabric_.csend(rank_, to, std::move(message));
}

ClassicalMessage Communicator::crecv(int from, const std::string& tag) {
    return fabric_.crecv(rank_, from, tag);
}

}  // namespace qmpi
