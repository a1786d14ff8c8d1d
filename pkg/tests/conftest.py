import pytest

from offerforge.customer_model import CustomerRecord

BASE = dict(
    age=30, gender="male", recency=10, frequency=5, monetary=10_000, margin_amount=2_000,
    churn_probability=0.1, days_since_last_upgrade=100, days_of_zero_usage=0,
    outgoing_call_minutes=60.0, night_sms_count=10, internet_mb=100.0,
)


def make_customer(id="c0", **overrides) -> CustomerRecord:
    return CustomerRecord(id=id, **{**BASE, **overrides})


@pytest.fixture
def customer():
    return make_customer
