"""Write the curated retrieval notes to JSONL; ``deenkit ingest-docs`` then embeds them."""

import json
import sys

N40 = "https://sunnah.com/nawawi40:{}"
Q = "https://quran.com/{}"

DOCS = [
    # fiqh: purification and prayer
    ("fiqh-wudu-1", "fiqh", "Ablution (wudu): obligatory acts", None,
     "The obligatory acts of ablution named in Quran 5:6 are washing the face, washing the arms up to and including the elbows, wiping the head, and washing the feet up to and including the ankles. Most schools add intention and sequence; the Hanafi school treats intention and sequence as recommended rather than required."),
    ("fiqh-wudu-2", "fiqh", "Ablution (wudu): what breaks it", None,
     "Ablution is broken by anything that exits from the front or back passage, deep sleep while not seated firmly, loss of consciousness, and, according to the Shafi'i school, direct skin contact with a non-mahram of the opposite sex. The Hanafi school also counts flowing blood and vomiting a mouthful; the other schools differ on these."),
    ("fiqh-ghusl-1", "fiqh", "Ritual bath (ghusl)", None,
     "A ritual bath is required after sexual intercourse, seminal discharge, the end of menstruation and the end of post-natal bleeding. Its minimum is the intention and washing the whole body with water, including rinsing the mouth and nose according to the Hanafi school."),
    ("fiqh-tayammum-1", "fiqh", "Dry ablution (tayammum)", Q.format("4/43"),
     "When water is unavailable or its use would cause harm, a person may perform dry ablution by striking clean earth and wiping the face and hands, as permitted in Quran 4:43 and 5:6. Dry ablution is invalidated by whatever invalidates ablution and by finding water before the prayer is performed."),
    ("fiqh-salah-1", "fiqh", "The five daily prayers: times", None,
     "The five obligatory prayers are Fajr, Dhuhr, Asr, Maghrib and Isha. Fajr begins at true dawn, Dhuhr after the sun passes its zenith, Asr when an object's shadow reaches its length plus the noon shadow (twice its length in the Hanafi school), Maghrib at sunset and Isha when the twilight disappears."),
    ("fiqh-salah-2", "fiqh", "Combining and shortening prayers while travelling", None,
     "A traveller may shorten the four-unit prayers (Dhuhr, Asr and Isha) to two units. The majority permit combining Dhuhr with Asr and Maghrib with Isha during travel; the Hanafi school permits actual combining only at Arafah and Muzdalifah during Hajj. The minimum travel distance is commonly given as about 80 to 89 kilometres."),
    ("fiqh-salah-3", "fiqh", "Missed prayers (qada)", None,
     "An obligatory prayer that is missed, whether through sleep, forgetfulness or neglect, must be made up as soon as it is remembered. The schools agree that making up missed prayers is obligatory; repentance is also required when the prayer was missed deliberately."),
    ("fiqh-jumuah-1", "fiqh", "Friday prayer (jumu'ah)", Q.format("62/9"),
     "The Friday congregational prayer replaces Dhuhr and is obligatory on adult, sane, resident men who are able to attend, following Quran 62:9. It consists of a sermon followed by two units of prayer. Women, travellers and the sick are not obliged to attend but their prayer is valid if they do."),
    # fiqh: fasting
    ("fiqh-sawm-1", "fiqh", "Fasting in Ramadan: who must fast", Q.format("2/183"),
     "Fasting the month of Ramadan is obligatory on every adult, sane Muslim who is able, per Quran 2:183-185. The sick and travellers may break the fast and make up the days later; those permanently unable to fast, such as the very elderly, feed one poor person for each day missed."),
    ("fiqh-sawm-2", "fiqh", "What breaks the fast", None,
     "The fast is broken by deliberate eating, drinking or sexual intercourse between true dawn and sunset. Eating or drinking out of forgetfulness does not break the fast according to the majority. Deliberate intercourse during a Ramadan day requires both a make-up day and expiation (kaffarah)."),
    ("fiqh-sawm-3", "fiqh", "Expiation for breaking a Ramadan fast", None,
     "The expiation for deliberately breaking a Ramadan fast by intercourse is freeing a slave, or if that is not possible fasting two consecutive months, or if that is not possible feeding sixty poor people. The Hanafi and Maliki schools extend the expiation to deliberate eating and drinking as well."),
    ("fiqh-sawm-4", "fiqh", "Menstruation and fasting", None,
     "A woman who is menstruating or experiencing post-natal bleeding does not fast or pray. She makes up the missed fasting days after Ramadan but does not make up the missed prayers; this is agreed upon by the four schools."),
    # fiqh: zakat
    ("fiqh-zakat-1", "fiqh", "Zakat: conditions and rate", None,
     "Zakat is due on wealth that reaches the nisab and has been held for one lunar year (hawl). The rate on cash, gold, silver, trade goods and shares is one fortieth, which is 2.5 percent. Personal items such as a home, car and clothing are exempt."),
    ("fiqh-zakat-2", "fiqh", "Zakat: the nisab of gold and silver", None,
     "The nisab of gold is twenty mithqal, commonly converted to about 85 grams, and the nisab of silver is two hundred dirhams, about 595 grams. Many contemporary scholars assess cash against the lower of the two values so that more people pay to the benefit of the poor."),
    ("fiqh-zakat-3", "fiqh", "Zakat on crops and livestock", None,
     "Zakat on crops is one tenth when land is watered by rain or rivers and one twentieth when irrigated at cost, once the harvest reaches five wasq (about 653 kilograms). Livestock zakat on camels, cattle and sheep follows fixed tables; for example one sheep is due on forty to one hundred and twenty sheep."),
    ("fiqh-zakat-4", "fiqh", "Recipients of zakat", Q.format("9/60"),
     "Quran 9:60 names eight categories of recipients: the poor, the needy, those employed to collect it, those whose hearts are to be reconciled, freeing captives, debtors, in the cause of Allah, and the stranded traveller. Zakat may not be given to one's own parents, children or spouse."),
    ("fiqh-zakat-5", "fiqh", "Zakat al-fitr", None,
     "Zakat al-fitr is due at the end of Ramadan from every Muslim who has food beyond the needs of the day of Eid. It is one sa' of staple food per person, and it should be paid before the Eid prayer. The Hanafi school permits paying its value in money."),
    # fiqh: inheritance
    ("fiqh-mirath-1", "fiqh", "Inheritance: order of settling an estate", None,
     "Before distribution, funeral expenses are paid from the estate, then debts, then bequests up to one third of the remainder for non-heirs. What remains is divided among the heirs according to the fixed shares set in Quran 4:11-12 and 4:176."),
    ("fiqh-mirath-2", "fiqh", "Inheritance: fixed shares of spouses", Q.format("4/12"),
     "A husband receives one half of his wife's estate if she left no children and one quarter if she did. A wife receives one quarter if the husband left no children and one eighth if he did; several wives share that portion equally (Quran 4:12)."),
    ("fiqh-mirath-3", "fiqh", "Inheritance: children's shares", Q.format("4/11"),
     "When a son is present, sons and daughters share the residue with each son taking twice a daughter's portion. A single daughter without sons takes one half and two or more daughters take two thirds (Quran 4:11)."),
    ("fiqh-mirath-4", "fiqh", "Inheritance: proportional reduction and return", None,
     "When the fixed shares add up to more than the estate, every share is reduced proportionally (al-'awl). When they add up to less and there is no residuary heir, the surplus is returned to the fixed-share heirs (al-radd); most schools that apply radd exclude the spouse from it."),
    # fiqh: food, finance, family
    ("fiqh-food-1", "fiqh", "Permissible and forbidden food", Q.format("5/3"),
     "Quran 5:3 prohibits carrion, blood, pork, and animals slaughtered in the name of other than Allah. Seafood is permissible according to the majority; the Hanafi school limits it to fish. Intoxicating drinks are forbidden in any quantity."),
    ("fiqh-food-2", "fiqh", "Slaughter (dhabh)", None,
     "A valid slaughter cuts the throat and windpipe and at least one jugular vein with a sharp instrument while mentioning the name of Allah. Meat slaughtered by Jews and Christians is permissible according to Quran 5:5, with scholarly differences about the conditions."),
    ("fiqh-riba-1", "fiqh", "Interest (riba)", Q.format("2/275"),
     "Quran 2:275-279 prohibits riba. Any fixed increase stipulated on a loan is riba according to scholarly consensus, including interest on conventional bank loans and deposits. Trade, profit-sharing (mudarabah) and partnership (musharakah) are permitted alternatives."),
    ("fiqh-finance-1", "fiqh", "Buying shares in companies", None,
     "Contemporary fiqh councils permit investing in company shares when the core business is lawful. Many screens also limit interest-bearing debt and interest income to a small proportion, and require purifying any impermissible income by giving it to charity."),
    ("fiqh-marriage-1", "fiqh", "Conditions of a valid marriage", None,
     "A valid marriage requires offer and acceptance, two witnesses, and a dowry (mahr) that is owed to the wife. The majority also require the consent of the bride's guardian (wali); the Hanafi school permits an adult woman to contract her own marriage to a suitable match."),
    ("fiqh-divorce-1", "fiqh", "Waiting period ('iddah)", Q.format("2/228"),
     "A divorced woman who menstruates waits three menstrual cycles (Quran 2:228); one who does not menstruate waits three months; a pregnant woman waits until delivery. A widow waits four months and ten days (Quran 2:234)."),
    ("fiqh-hajj-1", "fiqh", "Pillars of Hajj", None,
     "The pillars of Hajj include entering the state of ihram, standing at Arafah on the ninth of Dhul Hijjah, the circumambulation of ifadah, and, for most schools, walking between Safa and Marwah. Missing the standing at Arafah invalidates the Hajj."),
    ("fiqh-udhiyah-1", "fiqh", "Sacrificial animal (udhiyah)", None,
     "The sacrifice is offered from after the Eid al-Adha prayer until the end of the days of tashriq. A sheep or goat suffices for one person and a cow or camel for seven. The Hanafi school holds it obligatory on those who can afford it; the majority hold it a strongly emphasised sunnah."),
    # fatwa-style
    ("fatwa-music-1", "fatwa", "Fatwa summary: musical instruments", None,
     "Scholars differ on musical instruments. The four schools historically prohibited most instruments while permitting the daff at weddings and celebrations; some later scholars permitted instruments free of indecent content. Singing without instruments and with sound content is widely permitted."),
    ("fatwa-insurance-1", "fatwa", "Fatwa summary: insurance", None,
     "Many fiqh councils hold conventional commercial insurance impermissible because of excessive uncertainty (gharar) and interest, and permit cooperative (takaful) insurance. Insurance required by law, such as third-party car insurance, is permitted out of necessity."),
    ("fatwa-mortgage-1", "fatwa", "Fatwa summary: conventional mortgages", None,
     "Most contemporary scholars prohibit interest-based mortgages. The European Council for Fatwa and Research allowed Muslims in non-Muslim countries to take one for a needed family home when no Islamic alternative exists; other councils rejected this view."),
    # hadith
    ("hadith-n40-1", "hadith", "Forty Hadith of an-Nawawi 1: actions are by intentions", N40.format(1),
     "Actions are judged by intentions, and every person will have what they intended. Whoever emigrated for Allah and His Messenger, their emigration is for Allah and His Messenger; whoever emigrated for worldly gain or to marry, their emigration is for that."),
    ("hadith-n40-2", "hadith", "Forty Hadith of an-Nawawi 2: Islam, iman and ihsan", N40.format(2),
     "In the hadith of Jibril, Islam is described as the testimony of faith, prayer, zakat, fasting Ramadan and Hajj for those able; iman as belief in Allah, His angels, books, messengers, the Last Day and divine decree; and ihsan as worshipping Allah as though you see Him."),
    ("hadith-n40-3", "hadith", "Forty Hadith of an-Nawawi 3: the five pillars", N40.format(3),
     "Islam is built on five: testifying that there is no god but Allah and that Muhammad is the Messenger of Allah, establishing prayer, paying zakat, Hajj to the House, and fasting Ramadan."),
    ("hadith-n40-6", "hadith", "Forty Hadith of an-Nawawi 6: the lawful and the unlawful", N40.format(6),
     "The lawful is clear and the unlawful is clear, and between them are doubtful matters that many people do not know. Whoever avoids doubtful matters protects their religion and honour."),
    ("hadith-n40-13", "hadith", "Forty Hadith of an-Nawawi 13: love for your brother", N40.format(13),
     "None of you truly believes until he loves for his brother what he loves for himself."),
    ("hadith-n40-15", "hadith", "Forty Hadith of an-Nawawi 15: good speech and hospitality", N40.format(15),
     "Whoever believes in Allah and the Last Day should speak good or remain silent, honour their neighbour, and honour their guest."),
    # history and general knowledge
    ("history-prophet-1", "history", "Life of the Prophet: birth and early life", None,
     "Prophet Muhammad was born in Makkah around 570 CE, in the Year of the Elephant, to the Quraysh tribe. His father Abdullah died before his birth and his mother Aminah when he was six; he was raised by his grandfather Abd al-Muttalib and then his uncle Abu Talib."),
    ("history-prophet-2", "history", "Life of the Prophet: revelation and the Hijrah", None,
     "Revelation began around 610 CE in the cave of Hira with the first verses of Surah Al-Alaq. After about thirteen years of preaching in Makkah, the Prophet emigrated to Madinah in 622 CE; this Hijrah marks the start of the Islamic calendar."),
    ("history-caliphs-1", "history", "The rightly guided caliphs", None,
     "After the Prophet's death in 632 CE, the community was led by Abu Bakr, Umar ibn al-Khattab, Uthman ibn Affan and Ali ibn Abi Talib. Under Uthman the Quran was compiled into a standard written copy that was sent to the major cities."),
    ("history-quran-1", "history", "Compilation of the Quran", None,
     "The Quran was memorised and written down during the Prophet's lifetime. Abu Bakr ordered it gathered into one manuscript after many memorisers died at Yamamah, and Uthman later had standard copies made. The Hafs reading counts 6236 verses in 114 surahs."),
    ("history-madhhab-1", "history", "The four Sunni schools of law", None,
     "The four surviving Sunni schools are named after Abu Hanifa (died 767), Malik ibn Anas (died 795), al-Shafi'i (died 820) and Ahmad ibn Hanbal (died 855). They share the Quran and Sunnah as sources and differ in methods such as the use of analogy and local practice."),
    ("article-pillars-1", "article", "The six articles of faith", None,
     "Muslims believe in Allah, His angels, His revealed books, His messengers, the Last Day, and divine decree, both its good and its bad. These six articles are listed in the hadith of Jibril."),
    ("article-tawhid-1", "article", "Tawhid: the oneness of God", Q.format("112/1"),
     "Tawhid is the affirmation that Allah is one, without partner, as stated in Surah Al-Ikhlas. Scholars describe it as oneness in lordship, in the right to be worshipped, and in names and attributes."),
    ("article-eid-1", "article", "The two Eids", None,
     "Eid al-Fitr is celebrated on the first of Shawwal at the end of Ramadan, and Eid al-Adha on the tenth of Dhul Hijjah during the Hajj season. Each begins with a congregational prayer; zakat al-fitr is paid before the Eid al-Fitr prayer and the sacrifice follows the Eid al-Adha prayer."),
    ("article-laylat-1", "article", "Laylat al-Qadr", Q.format("97/1"),
     "Laylat al-Qadr, the Night of Decree, is better than a thousand months (Surah Al-Qadr). It is sought in the odd nights of the last ten nights of Ramadan, and many Muslims give particular attention to the 27th night."),
    ("article-charity-1", "article", "Voluntary charity (sadaqah)", Q.format("2/261"),
     "Voluntary charity is encouraged at any time and in any amount. Quran 2:261 compares spending in the way of Allah to a grain that grows seven ears, each with a hundred grains. Smiling, removing harm from the road and a kind word are also described as charity in hadith."),
    ("article-parents-1", "article", "Kindness to parents", Q.format("17/23"),
     "Quran 17:23-24 commands kindness to parents, forbids even saying 'uff' to them in their old age, and teaches the prayer: My Lord, have mercy on them as they raised me when I was small."),
    ("ar-fiqh-jamaah-1", "fiqh", "صلاة الجماعة", None,
     "صلاة الجماعة في المسجد مشروعة للرجال في الصلوات الخمس، وهي سنة مؤكدة عند الحنفية والمالكية، وفرض كفاية عند الشافعية، وواجبة على الأعيان عند الحنابلة. وأقل الجماعة إمام ومأموم."),
    ("ar-fiqh-wudu-1", "fiqh", "فرائض الوضوء", Q.format("5/6"),
     "فرائض الوضوء المذكورة في سورة المائدة الآية 5:6 هي غسل الوجه، وغسل اليدين إلى المرفقين، ومسح الرأس، وغسل الرجلين إلى الكعبين، وزاد بعض الفقهاء النية والترتيب والموالاة."),
    ("ar-fiqh-sawm-1", "fiqh", "مفطرات الصيام", Q.format("2/187"),
     "يفسد الصوم الأكل والشرب والجماع عمدا في نهار رمضان، والقيء عمدا. ومن أكل أو شرب ناسيا فصومه صحيح ولا قضاء عليه عند الجمهور."),
    ("ar-fiqh-zakat-1", "fiqh", "نصاب الزكاة", None,
     "تجب الزكاة في النقود إذا بلغت النصاب وحال عليها الحول، ونصاب الذهب خمسة وثمانون غراما تقريبا، ونصاب الفضة خمسمائة وخمسة وتسعون غراما، ومقدار الواجب ربع العشر."),
    ("ar-fiqh-qasr-1", "fiqh", "قصر الصلاة في السفر", Q.format("4/101"),
     "يشرع للمسافر قصر الصلاة الرباعية إلى ركعتين، ويجوز الجمع بين الظهر والعصر وبين المغرب والعشاء عند الجمهور في السفر، ويرى الحنفية أن الجمع لا يكون إلا في عرفة ومزدلفة."),
]


def main(out: str) -> None:
    with open(out, "w", encoding="utf-8") as fh:
        for cid, coll, title, url, text in DOCS:
            rec = {"chunk_id": cid, "collection": coll, "source_title": title, "source_url": url, "text": text}
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "docs.jsonl")
