"""Pull billing keywords out of statement lines."""
from offerforge.keyword_extraction import extract_keywords, load_dictionary

statement = """\
2024-05-02 Voice calls - outgoing local to Airtel mobile
2024-05-09 Value Added Services: SMS – national to Airtel mobiles
2024-05-31 150 nat sms free
2024-03-31 Last bill period late fee
Service tax
""".splitlines()

dictionary = load_dictionary()
for hit in extract_keywords(statement, dictionary):
    arg = f" ({hit.numeric_arg})" if hit.numeric_arg is not None else ""
    print(f"line {hit.line_no}: {hit.keyword.value}{arg}, day {hit.date}")
